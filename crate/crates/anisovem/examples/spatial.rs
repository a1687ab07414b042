use anisovem::adapt::{adaptive_loop_with, AdaptConfig};
use anisovem::cases;
use anisovem::estimator::EstimatorKind;
use anisovem::geometry::{eig_sym2, polygon_quadrature};

fn main() {
    let case = cases::case2();
    for kind in [EstimatorKind::Heuristic, EstimatorKind::Isotropic] {
        let config = AdaptConfig {
            order: 1, kind, error_tol: 1e-9, max_iters: 40,
            max_dofs: 15_000, grid_n: 4, ..AdaptConfig::default()
        };
        let mut printed = false;
        adaptive_loop_with(&config, &case, |st| {
            if st.dofmap.n_dofs() < 14000 || printed { return; }
            printed = true;
            println!("=== {kind:?} at N={} err {:.3e}", st.dofmap.n_dofs(), st.error);
            // histogram of cells and true error by x band
            let bands = [0.0, 0.5, 0.75, 0.9, 0.96, 1.0];
            let nc = st.mesh.num_cells();
            let mut count = [0usize; 5];
            let mut err_in = [0.0f64; 5];
            let mut asp_sum = [0.0f64; 5];
            for ci in 0..nc {
                let poly = &st.mesh.cell(ci).polygon;
                let cx = poly.centroid().x;
                let b = bands.windows(2).position(|w| cx >= w[0] && cx < w[1]).unwrap_or(4);
                count[b] += 1;
                let quad = polygon_quadrature(poly, 4).unwrap();
                let coeffs = &st.projection.cells[ci].value;
                let mono = &st.elements[ci].monomials;
                err_in[b] += quad.integrate(|x, y| {
                    let gh = mono.eval_poly_grad(coeffs, x, y);
                    ((case.grad)(x, y) - gh).norm_squared()
                });
                asp_sum[b] += eig_sym2(&poly.second_moment()).unwrap().ratio().sqrt();
            }
            let tot: f64 = err_in.iter().sum();
            for b in 0..5 {
                println!("  x in [{:.2},{:.2}): cells {:6} ({:4.1}%) err^2 share {:5.1}% avg aspect {:.2}",
                    bands[b], bands[b+1], count[b], 100.0*count[b] as f64/nc as f64,
                    100.0*err_in[b]/tot, asp_sum[b]/count[b].max(1) as f64);
            }
        }).unwrap();
    }
}
