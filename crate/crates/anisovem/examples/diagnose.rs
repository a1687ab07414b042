use anisovem::adapt::{adaptive_loop_with, AdaptConfig};
use anisovem::cases;
use anisovem::estimator::EstimatorKind;
use anisovem::geometry::polygon_quadrature;

fn main() {
    let case = cases::case2();
    for kind in [EstimatorKind::Heuristic, EstimatorKind::Isotropic] {
        let config = AdaptConfig {
            order: 1, kind, error_tol: 1e-9, max_iters: 21,
            max_dofs: 150_000, grid_n: 4, ..AdaptConfig::default()
        };
        println!("=== {kind:?}");
        adaptive_loop_with(&config, &case, |st| {
            if st.iter % 5 != 0 { return; }
            let nc = st.mesh.num_cells();
            // true per-cell squared error
            let mut true_err = vec![0.0f64; nc];
            for ci in 0..nc {
                let poly = &st.mesh.cell(ci).polygon;
                let quad = polygon_quadrature(poly, 4).unwrap();
                let coeffs = &st.projection.cells[ci].value;
                let mono = &st.elements[ci].monomials;
                true_err[ci] = quad.integrate(|x, y| {
                    let gh = mono.eval_poly_grad(coeffs, x, y);
                    ((case.grad)(x, y) - gh).norm_squared()
                });
            }
            // sort cells by score desc; how much TRUE error do the marked cells hold?
            let marked: std::collections::HashSet<usize> = st.marked.iter().cloned().collect();
            let total_true: f64 = true_err.iter().sum();
            let marked_true: f64 = st.marked.iter().map(|&c| true_err[c]).sum();
            // correlation proxy: fraction of true error in top-|marked| TRUE cells
            let mut by_true: Vec<usize> = (0..nc).collect();
            by_true.sort_by(|&a, &b| true_err[b].partial_cmp(&true_err[a]).unwrap());
            let ideal_true: f64 = by_true.iter().take(marked.len()).map(|&c| true_err[c]).sum();
            println!("iter {:2}: cells {:6} marked {:5} ({:4.1}%) | marked holds {:4.1}% of true err (ideal for that count {:4.1}%) | est/err {:.2}",
                st.iter, nc, marked.len(), 100.0 * marked.len() as f64 / nc as f64,
                100.0 * marked_true / total_true, 100.0 * ideal_true / total_true,
                st.indicators.global / st.error);
        }).unwrap();
    }
}
