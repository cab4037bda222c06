use std::collections::BTreeSet;

use peakdim::dimension::{default_rho_grid, dimh_estimate};
use peakdim::exceed::{
    collect_exceedance_1d, ExceedanceSpec, GaugeKind, GaugeSpec, Transform,
};
use peakdim::shell::{Ambient, RunShellBuilder};
use peakdim::traj::stream_ou;

fn main() {
    let gamma = 1.0;
    let n_max = 36u32;
    let spec = ExceedanceSpec::new(
        GaugeSpec::with_default_start(GaugeKind::SqrtLog, 1.0).unwrap(),
        gamma,
    )
    .unwrap();
    let mut pooled: BTreeSet<i64> = BTreeSet::new();
    for r in 0..32u64 {
        let outcome = collect_exceedance_1d(
            stream_ou(n_max as f64, 0.25, 1u64.wrapping_add(r)).unwrap(),
            std::slice::from_ref(&spec),
            Transform::Identity,
            Ambient::HalfLine,
        )
        .unwrap();
        for n in outcome[0].pixels.occupied_shells() {
            pooled.extend(outcome[0].pixels.shell(n).unwrap().cells_1d());
        }
    }
    println!("pooled t-cells: {:?}", pooled);
    let mut b = RunShellBuilder::new(1.0);
    let mut prev_end = i64::MIN;
    for &k in &pooled {
        let lo = (k as f64).exp().ceil() as i64;
        let hi = ((k + 1) as f64).exp().ceil() as i64;
        let start = lo.max(prev_end);
        if hi <= start {
            continue;
        }
        b.push_run(start, (hi - start) as u64);
        prev_end = hi;
    }
    let image = b.into_pixel_set(Ambient::HalfLine);
    println!("image occupied shells: {:?}", image.occupied_shells());
    let rho = default_rho_grid(1);
    let est = dimh_estimate(&image, &rho, 3, n_max).unwrap();
    println!("dim {} bounded {} rho_star {:?}", est.value, est.bounded, est.rho_star);
    println!("slopes (rho, slope):");
    for (r, s) in rho.iter().zip(est.slopes.iter()) {
        println!("  {:.3} {:?}", r, s);
    }
    for row in &est.per_shell {
        println!("shell row: {:?}", row);
    }
}
