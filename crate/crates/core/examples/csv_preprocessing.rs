//! Reads a timestamped CSV series, downsamples it, normalizes it and cuts
//! it into windows.

use lstm_gnb::series::{downsample, make_windows, minmax_normalize, read_series_csv};

fn main() -> lstm_gnb::Result<()> {
    let mut csv = String::from("timestamp,value\n");
    for i in 0..96 {
        let hour = i as f64 * 0.25;
        let load = 3.0 + 2.0 * (-(hour - 13.0).powi(2) / 18.0).exp();
        csv.push_str(&format!("2024-03-04T{:02}:{:02}:00Z,{load:.4}\n", i / 4, (i % 4) * 15));
    }
    let raw = read_series_csv(csv.as_bytes(), "power")?;
    println!("{} points every {} s", raw.len(), raw.sample_interval());

    let coarse = downsample(&raw, 8)?;
    println!("{} points every {} s after block means of 8", coarse.len(), coarse.sample_interval());

    let (scaled, params) = minmax_normalize(&coarse)?;
    println!("min {:.3} max {:.3}", params.min, params.max);

    for w in make_windows(&scaled, 6, 3)? {
        let pts: Vec<String> = w.points.iter().map(|p| format!("{p:.2}")).collect();
        println!("window at {:>2}: {}", w.source_offset, pts.join(" "));
    }
    Ok(())
}
