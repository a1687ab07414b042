use anisovem::adapt::{adaptive_loop, AdaptConfig};
use anisovem::cases;
use anisovem::estimator::EstimatorKind;

fn main() {
    for (case, tol) in [(cases::case1(), 2e-2), (cases::case2(), 2e-2), (cases::case3(), 5e-2)] {
        let mut ns = Vec::new();
        for kind in [EstimatorKind::Heuristic, EstimatorKind::Isotropic] {
            let config = AdaptConfig {
                order: 2, kind, error_tol: tol, max_iters: 60,
                max_dofs: 2_000_000, grid_n: 4, ..AdaptConfig::default()
            };
            let log = adaptive_loop(&config, &case).unwrap();
            let last = log.final_record().unwrap();
            println!("k2 {} {:?}: N {} err {:.3e} iters {}", case.name, kind, last.n_dofs, last.error, log.rows.len());
            ns.push(last.n_dofs as f64);
        }
        println!("  -> heur/iso = {:.3}", ns[0] / ns[1]);
    }
}
