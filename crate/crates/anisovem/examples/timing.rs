use anisovem::adapt::{adaptive_loop, AdaptConfig};
use anisovem::cases;
use anisovem::estimator::EstimatorKind;
use std::time::Instant;

fn main() {
    // k=1 leg of the rate study.
    let t0 = Instant::now();
    let config = AdaptConfig {
        order: 1,
        kind: EstimatorKind::Heuristic,
        error_tol: 2e-2,
        max_iters: 45,
        max_dofs: 1_000_000,
        grid_n: 4,
        ..AdaptConfig::default()
    };
    let log = adaptive_loop(&config, &cases::case2()).unwrap();
    let last = log.final_record().unwrap();
    println!("k=1: {} iters, {} dofs, err {:.4e}, {:.1?}", log.rows.len(), last.n_dofs, last.error, t0.elapsed());

    // k=2 leg.
    let t0 = Instant::now();
    let config2 = AdaptConfig {
        order: 2,
        kind: EstimatorKind::Heuristic,
        error_tol: 5e-3,
        max_iters: 45,
        max_dofs: 1_000_000,
        grid_n: 4,
        ..AdaptConfig::default()
    };
    let log2 = adaptive_loop(&config2, &cases::case2()).unwrap();
    let last2 = log2.final_record().unwrap();
    println!("k=2: {} iters, {} dofs, err {:.4e}, {:.1?}", log2.rows.len(), last2.n_dofs, last2.error, t0.elapsed());
    for r in &log2.rows {
        println!("  iter {:2} N {:6} err {:.4e}  C1={:.2} C2={:.1}", r.iter, r.n_dofs, r.error, r.error*(r.n_dofs as f64).sqrt(), r.error*r.n_dofs as f64);
    }
}
