use std::path::Path;

use anyhow::{Context, Result};
use trailerlink::pairing::{parse_gps_csv, spoof_check, SpoofCheckParams, Verdict};

use crate::exit;

pub struct SpoofArgs<'a> {
    pub csv: &'a Path,
    pub d: f64,
    pub e_t: f64,
    pub e_r: f64,
    pub per_axis: Option<(f64, f64)>,
}

/// Prints one verdict per index and a summary line. Returns the exit code.
pub fn spoof_check_cmd(a: &SpoofArgs) -> Result<u8> {
    let params = match a.per_axis {
        Some((dx, dy)) => SpoofCheckParams::per_axis(dx, dy, a.e_t, a.e_r),
        None => SpoofCheckParams::new(a.d, a.e_t, a.e_r),
    };
    let params = match params {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return Ok(exit::CONFIG_ERROR);
        }
    };
    let text = std::fs::read_to_string(a.csv).with_context(|| format!("reading {}", a.csv.display()))?;
    let (tractor, trailer) = match parse_gps_csv(&text) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {}: {e}", a.csv.display());
            return Ok(exit::CONFIG_ERROR);
        }
    };
    let verdicts = match spoof_check(&tractor, &trailer, &params) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e}");
            return Ok(exit::CONFIG_ERROR);
        }
    };
    let mut spoofed = 0;
    println!("index,t,residual_x,residual_y,verdict");
    for (i, v) in verdicts.iter().enumerate() {
        let (rx, ry) = params.residuals(&tractor[i], &trailer[i]);
        println!("{i},{},{rx},{ry},{v}", tractor[i].t);
        if *v == Verdict::SpoofOrMalfunction {
            spoofed += 1;
        }
    }
    println!(
        "# {} indices, {} consistent, {} spoof-or-malfunction, budget {}",
        verdicts.len(),
        verdicts.len() - spoofed,
        spoofed,
        params.budget()
    );
    Ok(if spoofed > 0 { exit::SPOOF_DETECTED } else { exit::SUCCESS })
}
