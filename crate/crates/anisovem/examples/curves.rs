use anisovem::adapt::{adaptive_loop, AdaptConfig};
use anisovem::cases;
use anisovem::estimator::EstimatorKind;

fn interp_n_at(rows: &[(f64, f64)], target: f64) -> Option<f64> {
    // log-log interpolation of N at err = target (rows ordered by iter).
    for w in rows.windows(2) {
        let (n0, e0) = w[0];
        let (n1, e1) = w[1];
        if e0 >= target && e1 <= target && e0 > e1 {
            let t = (target.ln() - e0.ln()) / (e1.ln() - e0.ln());
            return Some((n0.ln() + t * (n1.ln() - n0.ln())).exp());
        }
    }
    None
}

fn main() {
    for (case, maxit) in [(cases::case1(), 34usize), (cases::case2(), 30), (cases::case3(), 32)] {
        let mut data = Vec::new();
        for kind in [EstimatorKind::Heuristic, EstimatorKind::Isotropic] {
            let config = AdaptConfig {
                order: 1, kind, error_tol: 1e-9, max_iters: maxit,
                max_dofs: 150_000, grid_n: 4, ..AdaptConfig::default()
            };
            let log = adaptive_loop(&config, &case).unwrap();
            let rows: Vec<(f64, f64)> = log.rows.iter().map(|r| (r.n_dofs as f64, r.error)).collect();
            println!("{} {:?}: final N {} err {:.3e}", case.name, kind, rows.last().unwrap().0, rows.last().unwrap().1);
            data.push(rows);
        }
        print!("  N(err) ratios heur/iso:");
        for target in [0.5, 0.3, 0.2, 0.12, 0.08, 0.05, 0.03] {
            if let (Some(nh), Some(ni)) = (interp_n_at(&data[0], target), interp_n_at(&data[1], target)) {
                print!("  {target}: {:.2}", nh / ni);
            }
        }
        println!();
    }
}
