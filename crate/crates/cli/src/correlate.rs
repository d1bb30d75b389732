use std::fs::File;
use std::io::{BufReader, BufWriter, Write};

use serde::Serialize;
use triplet_core::stats::{gamma, read_records_csv, simulate, write_records_csv};
use triplet_core::{PairStatistics, TripletModel};

use crate::args::{CorrelateArgs, SimulateArgs, StatisticsArg};
use crate::{CliError, CliResult};

fn model(a: &SimulateArgs) -> CliResult<TripletModel> {
    let mut m = match &a.config {
        Some(p) => serde_json::from_str(&std::fs::read_to_string(p)?)
            .map_err(|e| CliError::Usage(format!("{}: {e}", p.display())))?,
        None => TripletModel {
            mean_pairs: 1e4,
            pair_statistics: PairStatistics::Thermal,
            conversion_prob: 0.013,
            efficiencies: [0.44, 0.72, 0.43],
            background: [0.0; 3],
        },
    };
    if let Some(v) = a.mean_pairs {
        m.mean_pairs = v;
    }
    if let Some(s) = a.statistics {
        m.pair_statistics = match s {
            StatisticsArg::Poisson => PairStatistics::Poisson,
            StatisticsArg::Thermal => PairStatistics::Thermal,
            StatisticsArg::Multithermal => PairStatistics::Multithermal {
                modes: a.modes.ok_or_else(|| CliError::Usage("--statistics multithermal needs --modes".into()))?,
            },
        };
    } else if let (Some(modes), PairStatistics::Multithermal { .. }) = (a.modes, m.pair_statistics) {
        m.pair_statistics = PairStatistics::Multithermal { modes };
    }
    if let Some(p) = a.conversion_prob {
        m.conversion_prob = p;
    }
    if let Some(e) = a.eta {
        m.efficiencies = e;
    }
    if let Some(b) = a.background {
        m.background = b;
    }
    m.validate()?;
    Ok(m)
}

pub fn cmd_simulate(a: &SimulateArgs, out: &mut dyn Write) -> CliResult {
    let m = model(a)?;
    if a.shots == 0 {
        return Err(CliError::Usage("--shots must be at least 1".into()));
    }
    let records = simulate(&m, a.shots, a.seed)?;
    match &a.out {
        Some(p) => write_records_csv(BufWriter::new(File::create(p)?), &records)?,
        None => write_records_csv(out, &records)?,
    }
    Ok(())
}

#[derive(Serialize)]
struct Lag {
    k: usize,
    gamma: f64,
}

pub fn cmd_correlate(a: &CorrelateArgs, out: &mut dyn Write) -> CliResult {
    let records = read_records_csv(BufReader::new(File::open(&a.records)?))?;
    let lags =
        (0..=a.max_lag).map(|k| gamma(&records, k).map(|gamma| Lag { k, gamma })).collect::<Result<Vec<_>, _>>()?;
    let text = if a.json {
        serde_json::to_string_pretty(&lags)? + "\n"
    } else {
        let mut s = String::from("k,gamma\n");
        for l in &lags {
            s.push_str(&format!("{},{}\n", l.k, l.gamma));
        }
        s
    };
    match &a.out {
        Some(p) => std::fs::write(p, text)?,
        None => out.write_all(text.as_bytes())?,
    }
    if let Some(l) = lags.first() {
        eprintln!("epsilon = {:.6} over {} shots", l.gamma, records.len());
    }
    Ok(())
}
