//! Synthetic application template with controllable pressure on memory,
//! compute and network.
//!
//! One run executes, per worker, ω iterations of a main loop. Each
//! iteration first performs a computation phase — α passes of a strided SUM
//! kernel (`A[i] = B[i] + C[i]`, stride δ over γ-element vectors) with θ
//! square-root evaluations per touched element — and then a communication
//! phase of β synchronized all-to-all exchanges of λ bytes per peer.
//!
//! Small strides keep the working set hot in cache and maximize cache
//! references; large strides (a cache line or more) with a working set
//! beyond the cache capacity push traffic to main memory. θ shifts the mix
//! toward compute, starving the memory subsystem. λ and β control the bytes
//! pushed through the network path.
//!
//! All activity is software-counted, so a run reports exactly how many
//! element accesses, square roots and bytes it generated; the counters
//! stand in for hardware performance counters when estimating a profile.

pub mod presets;
mod transport;

pub use transport::{
    InProcessTransport, LoopbackTransport, ProbeEvent, ProbeEventKind, Transport, TransportProbe,
};

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::resource::ResourceVector;

/// Vector elements are f64, so a stride of 8 elements covers a cache line.
pub const ELEMENT_BYTES: u64 = 8;
pub const CACHE_LINE_BYTES: u64 = 64;

/// Default cache-capacity threshold for the DRAM attribution proxy: the
/// SLLC size of the calibration machine.
pub const DEFAULT_CACHE_BYTES: u64 = 12 * 1024 * 1024;

/// Seed of the square-root feedback variable T = sqrt(T); never reset
/// between iterations.
const SQRT_SEED: f64 = 2.0;

/// The seven template parameters of one synthetic application.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SyntheticAppSpec {
    /// Main-loop iterations; scales total runtime.
    pub omega: u64,
    /// Computation-phase passes per main iteration.
    pub alpha: u64,
    /// Communication-phase exchanges per main iteration.
    pub beta: u64,
    /// Elements per vector; the working set is 3·γ·8 bytes.
    pub gamma: u64,
    /// Stride in elements over the vectors.
    pub delta: u64,
    /// Square-root evaluations per touched element.
    pub theta: u64,
    /// Bytes sent to each peer per all-to-all exchange.
    pub lambda_bytes: u64,
}

impl SyntheticAppSpec {
    pub fn validate(&self) -> Result<()> {
        if self.gamma < 1 {
            return Err(Error::Config("gamma must be at least 1 element".to_string()));
        }
        if self.delta < 1 {
            return Err(Error::Config("delta must be at least 1 element".to_string()));
        }
        if self.delta > self.gamma {
            return Err(Error::Config(format!(
                "stride delta ({}) must not exceed vector length gamma ({})",
                self.delta, self.gamma
            )));
        }
        Ok(())
    }

    /// Indices touched by one strided pass: ceil(γ/δ).
    pub fn touched_per_pass(&self) -> u64 {
        (self.gamma - 1) / self.delta + 1
    }

    /// Bytes the three vectors occupy.
    pub fn working_set_bytes(&self) -> u64 {
        3 * self.gamma * ELEMENT_BYTES
    }

    /// The analytic counter values for a run over `workers` workers. The
    /// run itself counts work as it happens; this closed form is the
    /// independent route tests compare against.
    pub fn expected_counters(&self, workers: u64) -> StressorCounters {
        let touched = self.touched_per_pass();
        let per_worker_accesses = self.omega * self.alpha * touched * 3;
        let per_worker_sqrts = self.omega * self.alpha * touched * self.theta;
        let per_worker_bytes =
            self.omega * self.beta * self.lambda_bytes * workers.saturating_sub(1);
        StressorCounters {
            element_accesses: workers * per_worker_accesses,
            sqrt_evaluations: workers * per_worker_sqrts,
            bytes_sent: workers * per_worker_bytes,
            bytes_received: workers * per_worker_bytes,
            computation_phase_seconds: 0.0,
            communication_phase_seconds: 0.0,
        }
    }
}

/// Software-counted activity of one run, summed over workers.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct StressorCounters {
    /// Vector-element reads and writes (two reads, one write per touched
    /// index).
    pub element_accesses: u64,
    pub sqrt_evaluations: u64,
    pub bytes_sent: u64,
    pub bytes_received: u64,
    pub computation_phase_seconds: f64,
    pub communication_phase_seconds: f64,
}

impl StressorCounters {
    fn accumulate(&mut self, other: &StressorCounters) {
        self.element_accesses += other.element_accesses;
        self.sqrt_evaluations += other.sqrt_evaluations;
        self.bytes_sent += other.bytes_sent;
        self.bytes_received += other.bytes_received;
        self.computation_phase_seconds += other.computation_phase_seconds;
        self.communication_phase_seconds += other.communication_phase_seconds;
    }

    /// Ignores the measured phase timings, which never reproduce across
    /// runs.
    pub fn counts_equal(&self, other: &StressorCounters) -> bool {
        self.element_accesses == other.element_accesses
            && self.sqrt_evaluations == other.sqrt_evaluations
            && self.bytes_sent == other.bytes_sent
            && self.bytes_received == other.bytes_received
    }
}

/// Executes the template on `workers` concurrent workers synchronized
/// through `transport`. Returns counters summed over workers.
pub fn run(
    spec: &SyntheticAppSpec,
    workers: usize,
    transport: &dyn Transport,
) -> Result<StressorCounters> {
    spec.validate()?;
    if workers == 0 {
        return Err(Error::Config("at least one worker required".to_string()));
    }
    if transport.worker_count() != workers {
        return Err(Error::Config(format!(
            "transport is wired for {} workers, run asked for {workers}",
            transport.worker_count()
        )));
    }

    let results: Vec<Result<StressorCounters>> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|worker| scope.spawn(move || worker_body(spec, worker, workers, transport)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("stressor worker panicked"))
            .collect()
    });

    let mut total = StressorCounters::default();
    for result in results {
        total.accumulate(&result?);
    }
    Ok(total)
}

fn worker_body(
    spec: &SyntheticAppSpec,
    worker: usize,
    workers: usize,
    transport: &dyn Transport,
) -> Result<StressorCounters> {
    let gamma = spec.gamma as usize;
    let delta = spec.delta as usize;
    let mut a = vec![0.0f64; gamma];
    let b = vec![1.0f64; gamma];
    let c = vec![2.0f64; gamma];
    let payload = vec![worker as u8; spec.lambda_bytes as usize];
    let mut sqrt_arg = SQRT_SEED;
    let mut counters = StressorCounters::default();

    for x in 0..spec.omega {
        let computation_started = Instant::now();
        for _ in 0..spec.alpha {
            let mut i = 0usize;
            let mut touched = 0u64;
            while i < gamma {
                a[i] = b[i] + c[i];
                for _ in 0..spec.theta {
                    sqrt_arg = sqrt_arg.sqrt();
                }
                touched += 1;
                i += delta;
            }
            counters.element_accesses += 3 * touched;
            counters.sqrt_evaluations += touched * spec.theta;
        }
        counters.computation_phase_seconds += computation_started.elapsed().as_secs_f64();

        let communication_started = Instant::now();
        for z in 0..spec.beta {
            let received =
                transport.all_to_all(worker, &payload).map_err(|e| Error::Communication {
                    main_iteration: x + 1,
                    comm_iteration: z + 1,
                    reason: e.to_string(),
                })?;
            counters.bytes_sent += spec.lambda_bytes * (workers as u64 - 1);
            counters.bytes_received += received.iter().map(|r| r.len() as u64).sum::<u64>();
        }
        counters.communication_phase_seconds += communication_started.elapsed().as_secs_f64();
    }

    // Keep the kernel's results observable so the loops cannot be optimized
    // away.
    std::hint::black_box((&a, sqrt_arg));
    Ok(counters)
}

/// Converts software counters into raw access rates (MR/s, MR/s, MB/s).
///
/// Every element access is served by the cache hierarchy, so the SLLC proxy
/// rate counts them all. Accesses are attributed to DRAM as well when the
/// stride spans at least a cache line *and* the working set exceeds
/// `cache_bytes` — the regime where the cache cannot hold the vectors and
/// traffic falls through to main memory. Rates measured by external tools
/// on real hardware should be ingested through profile files instead.
pub fn estimate_profile(
    spec: &SyntheticAppSpec,
    counters: &StressorCounters,
    wall_seconds: f64,
    cache_bytes: u64,
) -> Result<ResourceVector> {
    if !wall_seconds.is_finite() || wall_seconds <= 0.0 {
        return Err(Error::Domain(format!(
            "wall-clock duration {wall_seconds} must be positive"
        )));
    }
    let sllc_rate = counters.element_accesses as f64 / wall_seconds / 1e6;
    let dram_attributed = if spec.delta * ELEMENT_BYTES >= CACHE_LINE_BYTES
        && spec.working_set_bytes() > cache_bytes
    {
        counters.element_accesses
    } else {
        0
    };
    let dram_rate = dram_attributed as f64 / wall_seconds / 1e6;
    let net_rate = counters.bytes_sent as f64 / wall_seconds / 1e6;
    ResourceVector::raw(sllc_rate, dram_rate, net_rate)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn spec(
        omega: u64,
        alpha: u64,
        beta: u64,
        gamma: u64,
        delta: u64,
        theta: u64,
        lambda_bytes: u64,
    ) -> SyntheticAppSpec {
        SyntheticAppSpec { omega, alpha, beta, gamma, delta, theta, lambda_bytes }
    }

    #[test]
    fn single_full_stride_pass_counts_thirty_accesses() {
        // One pass over 10 elements at stride 1 touches 10 indices; each
        // touch is two reads and one write.
        let s = spec(1, 1, 0, 10, 1, 0, 0);
        let transport = InProcessTransport::new(1);
        let counters = run(&s, 1, &transport).unwrap();
        assert_eq!(counters.element_accesses, 30);
        assert_eq!(counters.sqrt_evaluations, 0);
        assert_eq!(counters.bytes_sent, 0);
    }

    #[test]
    fn strided_pass_counts_match_hand_derivation() {
        // ceil(100/7) = 15 touched per pass; 2*3 passes.
        let s = spec(2, 3, 0, 100, 7, 2, 0);
        let transport = InProcessTransport::new(1);
        let counters = run(&s, 1, &transport).unwrap();
        assert_eq!(counters.element_accesses, 270);
        assert_eq!(counters.sqrt_evaluations, 180);
    }

    #[test]
    fn all_to_all_fan_out_bytes() {
        // 4 workers, 2 exchanges of 1000 bytes to each of 3 peers.
        let s = spec(1, 0, 2, 1, 1, 0, 1000);
        let transport = InProcessTransport::new(4);
        let counters = run(&s, 4, &transport).unwrap();
        assert_eq!(counters.bytes_sent, 24000);
        assert_eq!(counters.bytes_received, 24000);
    }

    #[test]
    fn counters_match_closed_form_for_random_specs() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..50 {
            let workers = rng.random_range(1..=4usize);
            let gamma = rng.random_range(1..=2000u64);
            let s = SyntheticAppSpec {
                omega: rng.random_range(0..=3),
                alpha: rng.random_range(0..=20),
                beta: rng.random_range(0..=5),
                gamma,
                delta: rng.random_range(1..=gamma),
                theta: rng.random_range(0..=4),
                lambda_bytes: rng.random_range(0..=2048),
            };
            let transport = InProcessTransport::new(workers);
            let counters = run(&s, workers, &transport).unwrap();
            let expected = s.expected_counters(workers as u64);
            assert!(
                counters.counts_equal(&expected),
                "spec {s:?} x{workers}: {counters:?} vs {expected:?}"
            );
        }
    }

    #[test]
    fn doubling_omega_doubles_every_counter() {
        let base = spec(2, 3, 2, 64, 8, 3, 128);
        let doubled = SyntheticAppSpec { omega: 4, ..base };
        let transport = InProcessTransport::new(2);
        let c1 = run(&base, 2, &transport).unwrap();
        let c2 = run(&doubled, 2, &transport).unwrap();
        assert_eq!(c2.element_accesses, 2 * c1.element_accesses);
        assert_eq!(c2.sqrt_evaluations, 2 * c1.sqrt_evaluations);
        assert_eq!(c2.bytes_sent, 2 * c1.bytes_sent);
        assert_eq!(c2.bytes_received, 2 * c1.bytes_received);
    }

    #[test]
    fn zero_knobs_produce_zero_counters() {
        let transport = InProcessTransport::new(2);
        let no_sqrt = run(&spec(2, 2, 1, 16, 4, 0, 64), 2, &transport).unwrap();
        assert_eq!(no_sqrt.sqrt_evaluations, 0);
        let no_comm = run(&spec(2, 2, 0, 16, 4, 3, 64), 2, &transport).unwrap();
        assert_eq!(no_comm.bytes_sent, 0);
        let empty_payload = run(&spec(2, 2, 3, 16, 4, 3, 0), 2, &transport).unwrap();
        assert_eq!(empty_payload.bytes_sent, 0);
        assert_eq!(empty_payload.bytes_received, 0);
    }

    #[test]
    fn invalid_specs_are_config_errors() {
        let transport = InProcessTransport::new(1);
        let zero_gamma = spec(1, 1, 0, 0, 1, 0, 0);
        assert_eq!(run(&zero_gamma, 1, &transport).unwrap_err().class(), "config");
        let wide_stride = spec(1, 1, 0, 8, 9, 0, 0);
        assert_eq!(run(&wide_stride, 1, &transport).unwrap_err().class(), "config");
        let ok = spec(1, 1, 0, 8, 8, 0, 0);
        assert_eq!(run(&ok, 1, &transport).unwrap().element_accesses, 3);
    }

    #[test]
    fn worker_count_must_match_the_transport() {
        let transport = InProcessTransport::new(3);
        let err = run(&spec(1, 1, 0, 8, 1, 0, 0), 2, &transport).unwrap_err();
        assert_eq!(err.class(), "config");
    }

    struct FailingTransport {
        workers: usize,
        fail_at_call: u64,
        calls: std::sync::Mutex<Vec<u64>>,
        inner: InProcessTransport,
    }

    impl Transport for FailingTransport {
        fn worker_count(&self) -> usize {
            self.workers
        }

        fn all_to_all(&self, worker: usize, payload: &[u8]) -> crate::error::Result<Vec<Vec<u8>>> {
            let call = {
                let mut calls = self.calls.lock().unwrap();
                let call = calls[worker];
                calls[worker] += 1;
                call
            };
            if call == self.fail_at_call {
                return Err(crate::error::Error::Config("link down".to_string()));
            }
            self.inner.all_to_all(worker, payload)
        }
    }

    #[test]
    fn transport_failure_names_the_phase_iteration() {
        // beta = 3, so call index 4 is main iteration 2, comm iteration 2.
        let workers = 2;
        let transport = FailingTransport {
            workers,
            fail_at_call: 4,
            calls: std::sync::Mutex::new(vec![0; workers]),
            inner: InProcessTransport::new(workers),
        };
        let s = spec(3, 1, 3, 8, 1, 0, 16);
        let err = run(&s, workers, &transport).unwrap_err();
        match err {
            Error::Communication { main_iteration, comm_iteration, .. } => {
                assert_eq!((main_iteration, comm_iteration), (2, 2));
            }
            other => panic!("expected communication error, got {other:?}"),
        }
    }

    #[test]
    fn communication_phase_is_a_barrier_across_main_iterations() {
        let workers = 3;
        let (transport, probe) = InProcessTransport::with_probe(workers);
        // Asymmetric compute load would let unsynchronized workers drift.
        let s = spec(4, 2, 2, 256, 1, 1, 32);
        run(&s, workers, &transport).unwrap();
        let events = probe.events();
        let total_calls = s.omega * s.beta;
        for call in 0..total_calls - 1 {
            let last_complete = events
                .iter()
                .rposition(|e| e.call == call && e.kind == ProbeEventKind::Completed)
                .unwrap();
            let first_next = events
                .iter()
                .position(|e| e.call == call + 1 && e.kind == ProbeEventKind::Entered)
                .unwrap();
            assert!(last_complete < first_next, "exchange {call} overlapped {}", call + 1);
        }
    }

    #[test]
    fn estimate_profile_converts_counters_to_rates() {
        // 3e9 accesses over 2 s is a 1500 MR/s cache-side rate.
        let s = spec(1, 1, 0, 1000, 1, 0, 0);
        let counters = StressorCounters {
            element_accesses: 3_000_000_000,
            bytes_sent: 600_000_000,
            ..Default::default()
        };
        let profile = estimate_profile(&s, &counters, 2.0, DEFAULT_CACHE_BYTES).unwrap();
        assert!((profile.sllc() - 1500.0).abs() < 1e-9);
        assert!((profile.net() - 300.0).abs() < 1e-9);
        // Small working set: nothing attributed to DRAM.
        assert_eq!(profile.dram(), 0.0);
    }

    #[test]
    fn estimate_profile_attributes_wide_strides_over_big_working_sets_to_dram() {
        // Stride of 8 elements = one cache line; working set 3*gamma*8 bytes
        // above the cache threshold.
        let s = spec(1, 1, 0, 100_000, 8, 0, 0);
        let counters = StressorCounters { element_accesses: 1_000_000, ..Default::default() };
        let cache_bytes = 1024 * 1024; // 1 MiB, below the 2.4 MB working set
        let profile = estimate_profile(&s, &counters, 1.0, cache_bytes).unwrap();
        assert_eq!(profile.dram(), profile.sllc());
        assert!(profile.dram() > 0.0);
    }

    #[test]
    fn estimate_profile_of_zero_counters_is_zero() {
        let s = spec(1, 1, 0, 8, 1, 0, 0);
        let profile =
            estimate_profile(&s, &StressorCounters::default(), 1.0, DEFAULT_CACHE_BYTES).unwrap();
        assert_eq!((profile.sllc(), profile.dram(), profile.net()), (0.0, 0.0, 0.0));
    }

    #[test]
    fn estimate_profile_rejects_zero_duration() {
        let s = spec(1, 1, 0, 8, 1, 0, 0);
        let err = estimate_profile(&s, &StressorCounters::default(), 0.0, DEFAULT_CACHE_BYTES)
            .unwrap_err();
        assert_eq!(err.class(), "domain");
    }

    #[test]
    fn loopback_run_matches_in_process_counters() {
        let s = spec(2, 1, 2, 64, 4, 1, 256);
        let workers = 3;
        let inproc = InProcessTransport::new(workers);
        let loopback = LoopbackTransport::connect(workers).unwrap();
        let c1 = run(&s, workers, &inproc).unwrap();
        let c2 = run(&s, workers, &loopback).unwrap();
        assert!(c1.counts_equal(&c2), "{c1:?} vs {c2:?}");
        assert_eq!(c2.bytes_sent, c2.bytes_received);
    }
}
