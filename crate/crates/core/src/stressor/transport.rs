//! All-to-all exchange backends for the synthetic stressor.
//!
//! A transport connects a fixed set of workers. One `all_to_all` call sends
//! the caller's payload to every other worker and returns the payloads
//! received from them; the call is also a synchronization point — no worker
//! observes a completed exchange before every worker has contributed and
//! collected its data. All workers of a run must call with payloads of
//! equal length in each round.

use std::io::{Read, Write};
use std::net::{TcpListener, TcpStream};
use std::sync::{Arc, Barrier, Mutex};
use std::time::Duration;

use crate::error::{Error, Result};

pub trait Transport: Send + Sync {
    fn worker_count(&self) -> usize;

    /// Exchanges `payload` with every peer; returns the received payloads
    /// ordered by peer worker index (the caller excluded).
    fn all_to_all(&self, worker: usize, payload: &[u8]) -> Result<Vec<Vec<u8>>>;
}

/// What a probe records about one exchange: the moment a worker enters the
/// call with its data, and the moment it has collected everything.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProbeEventKind {
    Entered,
    Completed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProbeEvent {
    pub worker: usize,
    /// Zero-based index of the worker's `all_to_all` call.
    pub call: u64,
    pub kind: ProbeEventKind,
}

/// Shared event log for asserting barrier ordering in tests.
#[derive(Debug, Clone, Default)]
pub struct TransportProbe {
    events: Arc<Mutex<Vec<ProbeEvent>>>,
}

impl TransportProbe {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn events(&self) -> Vec<ProbeEvent> {
        self.events.lock().unwrap().clone()
    }

    fn record(&self, event: ProbeEvent) {
        self.events.lock().unwrap().push(event);
    }
}

struct InProcessState {
    /// mailboxes[destination][source]
    mailboxes: Vec<Vec<Option<Vec<u8>>>>,
    /// per-worker call counters
    calls: Vec<u64>,
}

/// Deterministic shared-buffer exchange for workers living in one process.
/// Two barrier phases per call: deposit, then collect.
pub struct InProcessTransport {
    workers: usize,
    state: Mutex<InProcessState>,
    barrier: Barrier,
    probe: Option<TransportProbe>,
}

impl InProcessTransport {
    pub fn new(workers: usize) -> Self {
        Self::build(workers, None)
    }

    /// Same transport, with every exchange recorded into the returned probe.
    pub fn with_probe(workers: usize) -> (Self, TransportProbe) {
        let probe = TransportProbe::new();
        (Self::build(workers, Some(probe.clone())), probe)
    }

    fn build(workers: usize, probe: Option<TransportProbe>) -> Self {
        Self {
            workers,
            state: Mutex::new(InProcessState {
                mailboxes: vec![vec![None; workers]; workers],
                calls: vec![0; workers],
            }),
            barrier: Barrier::new(workers),
            probe,
        }
    }
}

impl Transport for InProcessTransport {
    fn worker_count(&self) -> usize {
        self.workers
    }

    fn all_to_all(&self, worker: usize, payload: &[u8]) -> Result<Vec<Vec<u8>>> {
        if worker >= self.workers {
            return Err(Error::Config(format!(
                "worker index {worker} out of range for {} workers",
                self.workers
            )));
        }

        let call = {
            let mut state = self.state.lock().unwrap();
            let call = state.calls[worker];
            state.calls[worker] += 1;
            if let Some(probe) = &self.probe {
                probe.record(ProbeEvent { worker, call, kind: ProbeEventKind::Entered });
            }
            for destination in 0..self.workers {
                if destination != worker {
                    state.mailboxes[destination][worker] = Some(payload.to_vec());
                }
            }
            call
        };

        self.barrier.wait(); // everyone has deposited

        let received = {
            let mut state = self.state.lock().unwrap();
            let received: Vec<Vec<u8>> = (0..self.workers)
                .filter(|&source| source != worker)
                .map(|source| {
                    state.mailboxes[worker][source]
                        .take()
                        .expect("peer deposit missing after barrier")
                })
                .collect();
            if let Some(probe) = &self.probe {
                probe.record(ProbeEvent { worker, call, kind: ProbeEventKind::Completed });
            }
            received
        };

        self.barrier.wait(); // everyone has collected; slots reusable
        Ok(received)
    }
}

const LOOPBACK_TIMEOUT: Duration = Duration::from_secs(30);

/// Full-mesh TCP exchange over 127.0.0.1. Unlike the in-process transport
/// this pushes real bytes through the kernel's loopback path, exercising
/// genuine contention. Streams carry a 30 s timeout so a failed worker
/// surfaces as an error on its peers instead of a hang.
pub struct LoopbackTransport {
    workers: usize,
    /// streams[owner][peer]; only `owner`'s thread touches its row.
    streams: Vec<Vec<Option<TcpStream>>>,
}

impl LoopbackTransport {
    pub fn connect(workers: usize) -> Result<Self> {
        if workers == 0 {
            return Err(Error::Config("at least one worker required".to_string()));
        }
        if workers > 255 {
            return Err(Error::Config(format!(
                "loopback transport supports at most 255 workers, got {workers}"
            )));
        }
        let mut streams: Vec<Vec<Option<TcpStream>>> = (0..workers)
            .map(|_| (0..workers).map(|_| None).collect())
            .collect();

        let listeners: Vec<TcpListener> = (0..workers)
            .map(|_| TcpListener::bind("127.0.0.1:0"))
            .collect::<std::io::Result<_>>()?;
        let addrs: Vec<_> = listeners
            .iter()
            .map(|l| l.local_addr())
            .collect::<std::io::Result<_>>()?;

        // Lower index dials higher index; the dialer sends its id byte so
        // the acceptor can place the stream.
        for low in 0..workers {
            for high in (low + 1)..workers {
                let mut out = TcpStream::connect(addrs[high])?;
                out.write_all(&[low as u8])?;
                let (mut inc, _) = listeners[high].accept()?;
                let mut id = [0u8; 1];
                inc.read_exact(&mut id)?;
                if id[0] as usize != low {
                    return Err(Error::Config(format!(
                        "loopback handshake mismatch: expected {low}, got {}",
                        id[0]
                    )));
                }
                for stream in [&out, &inc] {
                    stream.set_nodelay(true)?;
                    stream.set_read_timeout(Some(LOOPBACK_TIMEOUT))?;
                    stream.set_write_timeout(Some(LOOPBACK_TIMEOUT))?;
                }
                streams[low][high] = Some(out);
                streams[high][low] = Some(inc);
            }
        }
        Ok(Self { workers, streams })
    }

    fn peer_stream(&self, worker: usize, peer: usize) -> Result<&TcpStream> {
        self.streams[worker][peer]
            .as_ref()
            .ok_or_else(|| Error::Config(format!("no stream between {worker} and {peer}")))
    }

    /// Writes `payload` to every peer while concurrently draining `expect`
    /// bytes from each; the writer runs on its own thread so large payloads
    /// cannot deadlock on full socket buffers.
    fn exchange(&self, worker: usize, payload: &[u8], expect: usize) -> Result<Vec<Vec<u8>>> {
        let peers: Vec<usize> = (0..self.workers).filter(|&p| p != worker).collect();
        std::thread::scope(|scope| {
            let writer = scope.spawn(|| -> Result<()> {
                for &peer in &peers {
                    let mut stream = self.peer_stream(worker, peer)?;
                    stream.write_all(payload)?;
                }
                Ok(())
            });
            let mut received = Vec::with_capacity(peers.len());
            for &peer in &peers {
                let mut stream = self.peer_stream(worker, peer)?;
                let mut buf = vec![0u8; expect];
                stream.read_exact(&mut buf)?;
                received.push(buf);
            }
            writer.join().expect("writer thread panicked")?;
            Ok(received)
        })
    }
}

impl Transport for LoopbackTransport {
    fn worker_count(&self) -> usize {
        self.workers
    }

    fn all_to_all(&self, worker: usize, payload: &[u8]) -> Result<Vec<Vec<u8>>> {
        if worker >= self.workers {
            return Err(Error::Config(format!(
                "worker index {worker} out of range for {} workers",
                self.workers
            )));
        }
        if self.workers == 1 {
            return Ok(Vec::new());
        }
        let received = self.exchange(worker, payload, payload.len())?;
        // Ack round: a worker leaves only after every peer confirmed it has
        // collected its payloads, which makes the call a barrier.
        self.exchange(worker, &[1u8], 1)?;
        Ok(received)
    }
}
