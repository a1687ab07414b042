use anisovem::adapt::{adaptive_loop_with, AdaptConfig};
use anisovem::cases;
use anisovem::estimator::EstimatorKind;
use anisovem::geometry::{eig_sym2, SymMat2};

fn main() {
    let config = AdaptConfig {
        order: 1,
        kind: EstimatorKind::Heuristic,
        error_tol: 1e-9,
        max_iters: 22,
        grid_n: 4,
        ..AdaptConfig::default()
    };
    let case = cases::case2();
    let mut last_iter = 0;
    adaptive_loop_with(&config, &case, |st| {
        last_iter = st.iter;
        if st.iter % 7 != 0 && st.iter != 21 { return; }
        let mut aspects: Vec<(f64, f64)> = st.mesh.cells().iter().map(|c| {
            let e = eig_sym2(&c.polygon.second_moment()).unwrap();
            (e.ratio().sqrt(), c.polygon.centroid().x)
        }).collect();
        aspects.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let n = aspects.len();
        let max = aspects[n-1];
        let p90 = aspects[(n as f64 * 0.9) as usize];
        let med = aspects[n/2];
        // aspect among layer cells (x > 0.9)
        let layer: Vec<f64> = st.mesh.cells().iter().filter(|c| c.polygon.centroid().x > 0.9)
            .map(|c| eig_sym2(&c.polygon.second_moment()).unwrap().ratio().sqrt()).collect();
        let lmax = layer.iter().cloned().fold(0.0f64, f64::max);
        let lavg = layer.iter().sum::<f64>() / layer.len().max(1) as f64;
        println!("iter {:2}: cells {:5} med_aspect {:.2} p90 {:.2} max {:.2}@x={:.2} | layer(x>0.9): n={} avg {:.2} max {:.2}",
            st.iter, n, med.0, p90.0, max.0, max.1, layer.len(), lavg, lmax);
    }).unwrap();
}
