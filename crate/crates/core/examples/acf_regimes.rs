//! Autocorrelation of each generator's normal stream at lags 1, 10 and one
//! week, next to the regime it is meant to imitate.

use lstm_gnb::series::{acf, Label};
use lstm_gnb::synth::{concat_stream, generate, Archetype, GeneratorConfig};

fn main() -> lstm_gnb::Result<()> {
    println!("archetype  lag1    lag10   week");
    for a in Archetype::ALL {
        let cfg = GeneratorConfig::for_archetype(a).with_seed(0);
        let stream = concat_stream(&generate(&cfg)?, Label::Normal, cfg.sample_interval())?;
        let week = if a == Archetype::Power {
            format!("{:.3}", acf(&stream, 7 * cfg.points_per_day)?)
        } else {
            "-".into()
        };
        println!(
            "{:<9}  {:.3}   {:.3}   {week}",
            a.name(),
            acf(&stream, 1)?,
            acf(&stream, 10)?
        );
    }
    Ok(())
}
