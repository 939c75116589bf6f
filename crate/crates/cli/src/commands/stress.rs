//! `interf stress`.

use std::path::PathBuf;
use std::time::Instant;

use serde::Serialize;

use interference_core::io::{self, RateTriple};
use interference_core::stressor::{
    self, presets, InProcessTransport, LoopbackTransport, StressorCounters, SyntheticAppSpec,
    DEFAULT_CACHE_BYTES,
};
use interference_core::{Error, Result};

use crate::output::Format;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum TransportArg {
    Inproc,
    Loopback,
}

#[derive(clap::Args)]
pub struct StressArgs {
    /// Preset label (S1..S18).
    #[arg(long, conflicts_with = "spec")]
    pub preset: Option<String>,

    /// Stressor parameter file (JSON).
    #[arg(long)]
    pub spec: Option<PathBuf>,

    /// Concurrent workers (VM stand-ins).
    #[arg(long, default_value_t = 1)]
    pub workers: usize,

    #[arg(long, value_enum, default_value_t = TransportArg::Inproc)]
    pub transport: TransportArg,

    /// Cache-capacity threshold for the DRAM attribution proxy.
    #[arg(long, default_value_t = DEFAULT_CACHE_BYTES)]
    pub cache_bytes: u64,

    #[arg(long, value_enum, default_value_t = Format::Table)]
    pub format: Format,
}

#[derive(Serialize)]
struct StressReport {
    spec: SyntheticAppSpec,
    workers: usize,
    transport: &'static str,
    counters: StressorCounters,
    wall_seconds: f64,
    /// Raw rates derived from the software counters: MR/s, MR/s, MB/s.
    estimated_profile: RateTriple,
}

pub fn run(args: StressArgs) -> Result<()> {
    let spec = match (&args.preset, &args.spec) {
        (Some(label), None) => presets::preset(label)?,
        (None, Some(path)) => io::load_spec(path)?,
        (None, None) => {
            return Err(Error::Config("either --preset or --spec is required".to_string()))
        }
        (Some(_), Some(_)) => unreachable!("clap conflicts_with"),
    };

    let started = Instant::now();
    let counters = match args.transport {
        TransportArg::Inproc => {
            let transport = InProcessTransport::new(args.workers);
            stressor::run(&spec, args.workers, &transport)?
        }
        TransportArg::Loopback => {
            let transport = LoopbackTransport::connect(args.workers)?;
            stressor::run(&spec, args.workers, &transport)?
        }
    };
    let wall_seconds = started.elapsed().as_secs_f64();
    let profile = stressor::estimate_profile(&spec, &counters, wall_seconds, args.cache_bytes)?;

    let report = StressReport {
        spec,
        workers: args.workers,
        transport: match args.transport {
            TransportArg::Inproc => "inproc",
            TransportArg::Loopback => "loopback",
        },
        counters,
        wall_seconds,
        estimated_profile: RateTriple {
            sllc: profile.sllc(),
            dram: profile.dram(),
            net: profile.net(),
        },
    };

    match args.format {
        Format::Json => println!("{}", serde_json::to_string_pretty(&report)?),
        Format::Table => {
            println!(
                "spec: omega={} alpha={} beta={} gamma={} delta={} theta={} lambda_bytes={}",
                report.spec.omega,
                report.spec.alpha,
                report.spec.beta,
                report.spec.gamma,
                report.spec.delta,
                report.spec.theta,
                report.spec.lambda_bytes
            );
            println!("workers: {} ({})", report.workers, report.transport);
            println!("element accesses:  {}", report.counters.element_accesses);
            println!("sqrt evaluations:  {}", report.counters.sqrt_evaluations);
            println!("bytes sent:        {}", report.counters.bytes_sent);
            println!("bytes received:    {}", report.counters.bytes_received);
            println!(
                "phase seconds:     computation {:.4}, communication {:.4} (summed over workers)",
                report.counters.computation_phase_seconds,
                report.counters.communication_phase_seconds
            );
            println!("wall seconds:      {:.4}", report.wall_seconds);
            println!(
                "estimated profile: sllc {:.2} MR/s, dram {:.2} MR/s, net {:.2} MB/s",
                report.estimated_profile.sllc,
                report.estimated_profile.dram,
                report.estimated_profile.net
            );
        }
    }
    Ok(())
}
