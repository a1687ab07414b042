use anisovem::adapt::{adaptive_loop, AdaptConfig};
use anisovem::cases;
use anisovem::estimator::EstimatorKind;
use anisovem::io::fit_rate;

fn main() {
    for (order, tol, max_iters) in [(1usize, 2e-2, 45usize), (2, 5e-3, 60)] {
        let config = AdaptConfig {
            order, kind: EstimatorKind::Heuristic, error_tol: tol,
            max_iters, max_dofs: 1_000_000, grid_n: 4, ..AdaptConfig::default()
        };
        let log = adaptive_loop(&config, &cases::case2()).unwrap();
        let pts: Vec<(f64, f64)> = log.rows.iter().map(|r| (r.n_dofs as f64, r.error)).collect();
        let m = fit_rate(&pts, 3).unwrap();
        let last = log.final_record().unwrap();
        println!("k={order}: rate m = {m:.4}, stopped at err {:.3e} with N {} after {} iters", last.error, last.n_dofs, log.rows.len());
    }
}
