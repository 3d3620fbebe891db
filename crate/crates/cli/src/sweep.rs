use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::Args;
use sardrt::scatter::{bsdf_eval, check_validity, sigma_ka, sigma_spm, WaveConfig};
use sardrt::scene::BsdfParams;

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub h: f64,
    #[arg(long)]
    pub l: f64,
    #[arg(long)]
    pub eps_r: f64,
    /// One or more blend weights; each gets its own block of rows.
    #[arg(long, value_delimiter = ',', default_value = "0.5")]
    pub tau: Vec<f64>,
    #[arg(long, default_value_t = 9.6e9)]
    pub frequency: f64,
    #[arg(long, default_value = "HH")]
    pub polarization: String,
    #[arg(long, default_value = "gaussian")]
    pub psd: String,
    #[arg(long, default_value_t = 0.0)]
    pub theta_start: f64,
    #[arg(long, default_value_t = 85.0)]
    pub theta_end: f64,
    #[arg(long, default_value_t = 1.0)]
    pub theta_step: f64,
    /// CSV destination; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Incidence angles in degrees, `start + i * step` up to `end` inclusive.
fn angles(start: f64, end: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !(end >= start) {
        bail!("need theta_step > 0 and theta_end >= theta_start");
    }
    let n = ((end - start) / step + 1e-9).floor() as usize + 1;
    Ok((0..n).map(|i| start + i as f64 * step).collect())
}

pub fn run(args: &SweepArgs) -> Result<ExitCode> {
    let wave = WaveConfig::new(args.frequency, args.polarization.parse()?, args.psd.parse()?)?;
    let thetas = angles(args.theta_start, args.theta_end, args.theta_step)?;
    let sink: Box<dyn Write> = match &args.out {
        Some(p) => Box::new(File::create(p).with_context(|| format!("creating {}", p.display()))?),
        None => Box::new(io::stdout().lock()),
    };
    let mut w = csv::Writer::from_writer(sink);
    w.write_record([
        "theta_deg", "tau", "sigma_spm", "sigma_ka", "sigma", "spm_valid", "ka_valid", "violations",
        "error",
    ])?;
    let mut failed_rows = 0;
    for &tau in &args.tau {
        let p = BsdfParams::new(args.h, args.l, args.eps_r, tau);
        for &deg in &thetas {
            let theta = deg.to_radians();
            let values = p.validate().and_then(|_| {
                Ok((sigma_spm(theta, &p, &wave)?, sigma_ka(theta, &p)?, bsdf_eval(theta, &p, &wave)?))
            });
            let mut row = vec![deg.to_string(), tau.to_string()];
            match values {
                Ok((spm, ka, blend)) => {
                    let v = check_validity(&p, theta, &wave);
                    let labels: Vec<&str> = v.violated.iter().map(|x| x.condition.label()).collect();
                    row.extend([
                        spm.to_string(),
                        ka.to_string(),
                        blend.sigma.to_string(),
                        v.spm_ok.to_string(),
                        v.ka_ok.to_string(),
                        labels.join("; "),
                        String::new(),
                    ]);
                }
                Err(e) => {
                    failed_rows += 1;
                    row.extend(std::iter::repeat_n(String::new(), 6));
                    row.push(e.to_string());
                }
            }
            w.write_record(&row)?;
        }
    }
    w.flush()?;
    if failed_rows > 0 {
        eprintln!("{failed_rows} rows could not be evaluated; see the error column");
    }
    Ok(ExitCode::SUCCESS)
}
