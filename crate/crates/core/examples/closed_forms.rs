//! Supports, peaks, masses and transport residuals of the three closed forms.

use rootflow::ClosedFormFamily;

fn main() -> rootflow::Result<()> {
    let families = [
        ClosedFormFamily::arcsine_probability(),
        ClosedFormFamily::semicircle(1.0)?,
        ClosedFormFamily::marchenko_pastur(1.0)?,
        ClosedFormFamily::marchenko_pastur(15.0)?,
    ];
    for f in families {
        println!("{}", f.name());
        for t in [0.0, 0.4, 0.8] {
            let s = f.support(t)?;
            let peak = f.peak(t)?.map(|(x, u)| format!("u({x:.5}) = {u:.5}")).unwrap_or_else(|| "none".into());
            let probe = s.center() + 0.3 * s.half_width();
            println!(
                "  t={t:.1}  support=[{:.5}, {:.5}]  mass={:.3}  median={:.5}  peak {peak}  residual={:.1e}",
                s.a(),
                s.b(),
                f.mass(t)?,
                f.quantile(t, 0.5)?,
                f.transport_residual(t, probe, 1e-3)?.abs(),
            );
        }
    }
    Ok(())
}
