use anisovem::adapt::{adaptive_loop, AdaptConfig};
use anisovem::cases;
use anisovem::estimator::EstimatorKind;
use std::time::Instant;

fn main() {
    let cases_tols = [
        (cases::case1(), 5e-2),
        (cases::case2(), 5e-2),
        (cases::case3(), 1e-1),
    ];
    for (case, tol) in cases_tols {
        let mut ns = Vec::new();
        for kind in [EstimatorKind::Heuristic, EstimatorKind::Isotropic] {
            let config = AdaptConfig {
                order: 1, kind, error_tol: tol, max_iters: 60,
                max_dofs: 2_000_000, grid_n: 4, ..AdaptConfig::default()
            };
            let t = Instant::now();
            let log = adaptive_loop(&config, &case).unwrap();
            let last = log.final_record().unwrap();
            println!("{} {:?}: N {} err {:.3e} iters {} in {:.1?}", case.name, kind, last.n_dofs, last.error, log.rows.len(), t.elapsed());
            ns.push(last.n_dofs as f64);
        }
        println!("  -> advantage: heur/iso = {:.3} (need <= 0.8)", ns[0] / ns[1]);
    }
}
