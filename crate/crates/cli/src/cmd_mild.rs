use std::io::Write;
use std::path::PathBuf;

use anyhow::Result;
use clap::Args;
use fracfield::mildness::{classify, default_k_schedule, default_m2_schedule, probe_m1, probe_m2};
use fracfield::QuadSpec;
use serde_json::json;

use crate::args::{parse_list, sink, write_all, ParamArgs, Points};
use crate::Status;

#[derive(Debug, Clone, Args)]
pub struct MildArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    /// Also run the numerical divergence probes
    #[arg(long)]
    pub probe: bool,
    /// Time at which the probes are evaluated
    #[arg(long, default_value_t = 1.0)]
    pub t: f64,
    /// Frequency cutoffs for the probes, comma separated
    #[arg(long, value_parser = parse_list)]
    pub k_schedule: Option<Points>,
    /// Time cutoffs for the space-time probe, comma separated, one per frequency cutoff
    #[arg(long, value_parser = parse_list)]
    pub eps_schedule: Option<Points>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run(a: &MildArgs, stdout: &mut dyn Write) -> Result<Status> {
    let alpha = a.params.alpha_or(None)?;
    let params = a.params.params(alpha)?;
    let verdict = classify(&params)?;
    let mut doc = json!({ "verdict": verdict });
    if a.probe {
        let kernel = a.params.kernel()?;
        let quad = QuadSpec::default();
        let ks = a.k_schedule.clone().unwrap_or_else(default_k_schedule);
        let m2_schedule = match &a.eps_schedule {
            Some(eps) => {
                if eps.len() != ks.len() {
                    return Err(fracfield::Error::InvalidSpec(
                        "--eps-schedule needs one entry per frequency cutoff".into(),
                    )
                    .into());
                }
                ks.iter().copied().zip(eps.iter().copied()).collect()
            }
            None if a.k_schedule.is_none() => default_m2_schedule(),
            None => {
                let d = default_m2_schedule::<f64>();
                ks.iter()
                    .zip(d.iter().map(|p| p.1).chain(std::iter::repeat(1e-5)))
                    .map(|(&k, e)| (k, e))
                    .collect()
            }
        };
        let m1 = probe_m1(&params, &kernel, a.t, &ks, &quad)?;
        let m2 = probe_m2(&params, &kernel, a.t, &m2_schedule, &quad)?;
        doc["probe"] = json!({ "m1": m1, "m2": m2 });
    }
    write_all(sink(a.out.as_deref(), stdout)?, |w| {
        serde_json::to_writer_pretty(&mut *w, &doc)?;
        writeln!(w)
    })?;
    Ok(if verdict.mild { Status::Ok } else { Status::NotMild })
}
