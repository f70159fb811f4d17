//! Averaged autocorrelation on an infinite binary tree and its power-law
//! asymptote.

use ultradiffusion::baselines::{loglog_slope, power_law_curve, PowerLawModel};

fn main() -> ultradiffusion::Result<()> {
    let m = PowerLawModel::new(2, 1.0)?;
    println!("s = {:.6}, v = {:.6}, D = {:.6}", m.silhouette(), m.exponent(), m.prefactor());
    let ts: Vec<f64> = (0..9).map(|k| 10f64.powf(1.0 + 0.5 * k as f64)).collect();
    let mut ys = Vec::new();
    println!("t\tseries\tasymptote");
    for &t in &ts {
        let p = power_law_curve(&m, t, 60)?;
        println!("{t:.1}\t{:.6e}\t{:.6e}", p.series, p.asymptote);
        ys.push(p.series);
    }
    println!("log-log slope: {:.5}", loglog_slope(&ts[2..], &ys[2..])?);
    Ok(())
}
