use invsq_core::model::{coupling_from, ModelParams};
use invsq_core::timedomain::{
    evolve, Grid, InitialData, InnerBoundary, ModeComponent, OuterBoundary,
};
use num_complex::Complex64;

const KAPPA0: f64 = 0.183_861_988_906_015_69;

#[test]
fn probe_norm_history() {
    let grid = Grid::new(1.0, 120.0, 4800).unwrap();
    let c = coupling_from(&ModelParams::new(2.0, 0, 1.0).unwrap()).unwrap();
    let init = InitialData::DecayingModes(vec![ModeComponent {
        kappa: KAPPA0,
        amplitude: Complex64::new(1.0, 0.0),
    }]);
    let out = evolve(
        &grid,
        &c,
        &init,
        InnerBoundary::EnvelopeMatched,
        OuterBoundary::Absorbing,
        3.0,
        30.0,
    )
    .unwrap();
    let n = out.norms.len();
    for k in (0..n).step_by(n / 40) {
        let t = out.probe.times[k];
        // effective decay rate over the next stretch
        let k2 = (k + n / 40).min(n - 1);
        let rate = (out.norms[k2].ln() - out.norms[k].ln()) / (out.probe.times[k2] - out.probe.times[k]);
        println!("t={t:7.3}  norm={:.6e}  d(ln N)/dt={rate:+.5f}", out.norms[k]);
    }
}
