//! Latency and energy models of the computation hierarchy: run the whole
//! task on the UAV, package-and-offload it to the edge or cloud, or split
//! it into a three-stage pipeline that forwards compact intermediate
//! features while stages overlap.

use crate::channel::achievable_rate;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// One pipeline stage of a splittable task.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stage {
    pub cycles: f64,
    /// Bits forwarded to the next stage (or returned, for the last).
    pub out_bits: f64,
}

/// A computation workload and its split structure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskSpec {
    /// Raw sensing payload entering the task (bits).
    pub input_bits: f64,
    pub total_cycles: f64,
    /// Control-command payload leaving the task (bits).
    pub output_bits: f64,
    /// Exactly three stages for the UAV -> edge -> cloud pipeline.
    pub stages: Vec<Stage>,
}

impl TaskSpec {
    pub fn validate(&self) -> Result<()> {
        let sum: f64 = self.stages.iter().map(|s| s.cycles).sum();
        if (sum - self.total_cycles).abs() > 1e-6 * self.total_cycles.max(1.0) {
            return Err(Error::Config(format!(
                "stage cycles {sum} do not sum to total {}",
                self.total_cycles
            )));
        }
        for w in self.stages.windows(2) {
            if w[1].out_bits > w[0].out_bits + 1e-9 {
                return Err(Error::Config("intermediate features must not grow".into()));
            }
        }
        if let Some(last) = self.stages.last() {
            if (last.out_bits - self.output_bits).abs() > 1e-9 {
                return Err(Error::Config("last stage must emit the output payload".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Role {
    Uav,
    Edge,
    Cloud,
}

/// Processing capability of one tier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NodeProfile {
    pub role: Role,
    pub frequency_hz: f64,
}

/// The three tiers of the hierarchy.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Nodes {
    pub uav: NodeProfile,
    pub edge: NodeProfile,
    pub cloud: NodeProfile,
}

/// Air interface and backhaul capacities seen by the offloader.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LinkProfile {
    /// UAV <-> edge bandwidth (Hz).
    pub bandwidth_hz: f64,
    pub snr_linear: f64,
    /// Edge <-> cloud backhaul (bits/s).
    pub backhaul_bps: f64,
}

impl LinkProfile {
    /// Shannon rate of the air interface (bits/s).
    pub fn air_rate_bps(&self) -> f64 {
        achievable_rate(self.snr_linear, self.bandwidth_hz)
    }
}

/// How a task was executed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    Local,
    /// Whole-task offload to the given tier.
    Pando(Role),
    Relay,
}

impl Mode {
    pub fn label(self) -> &'static str {
        match self {
            Mode::Local => "local",
            Mode::Pando(_) => "pando",
            Mode::Relay => "relay",
        }
    }
}

/// Per-leg decomposition of a closed-loop response.
///
/// For local and whole-task offloading `total = upload + compute +
/// download` holds exactly. For the pipelined relay the legs are the
/// unoverlapped sums while `total` is the pipeline makespan plus the
/// command return, so `total` is smaller than the sum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatencyBreakdown {
    pub upload_s: f64,
    pub compute_s: f64,
    pub download_s: f64,
    pub total_s: f64,
    pub mode: Mode,
}

/// Everything executes on the UAV; no transfers.
pub fn latency_local(task: &TaskSpec, uav: &NodeProfile) -> LatencyBreakdown {
    let compute = task.total_cycles / uav.frequency_hz;
    LatencyBreakdown {
        upload_s: 0.0,
        compute_s: compute,
        download_s: 0.0,
        total_s: compute,
        mode: Mode::Local,
    }
}

/// Package-and-offload: ship the raw input to the executor, compute there,
/// return the command. Cloud execution crosses the backhaul both ways.
/// Dead links surface as an infinite total.
pub fn latency_pando(task: &TaskSpec, executor: &NodeProfile, links: &LinkProfile) -> LatencyBreakdown {
    let air = links.air_rate_bps();
    if air <= 0.0 || (executor.role == Role::Cloud && links.backhaul_bps <= 0.0) {
        return LatencyBreakdown {
            upload_s: f64::INFINITY,
            compute_s: f64::INFINITY,
            download_s: f64::INFINITY,
            total_s: f64::INFINITY,
            mode: Mode::Pando(executor.role),
        };
    }
    let mut upload = task.input_bits / air;
    let mut download = task.output_bits / air;
    if executor.role == Role::Cloud {
        upload += task.input_bits / links.backhaul_bps;
        download += task.output_bits / links.backhaul_bps;
    }
    let compute = task.total_cycles / executor.frequency_hz;
    LatencyBreakdown {
        upload_s: upload,
        compute_s: compute,
        download_s: download,
        total_s: upload + compute + download,
        mode: Mode::Pando(executor.role),
    }
}

/// Split execution: stage 1 on the UAV, stage 2 at the edge, stage 3 in
/// the cloud, with the data cut into `chunks` equal parts so stage work
/// and feature transfers overlap.
///
/// The makespan of the five-resource pipeline (three stages, two links)
/// with per-chunk costs `p_r` is the classic
/// `sum_r p_r + (chunks - 1) * max_r p_r`; the finished command then
/// returns over backhaul and downlink.
pub fn latency_relay(
    task: &TaskSpec,
    nodes: &Nodes,
    links: &LinkProfile,
    chunks: usize,
) -> Result<LatencyBreakdown> {
    if task.stages.len() != 3 {
        return Err(Error::Config(format!(
            "relay needs exactly 3 stages, got {}",
            task.stages.len()
        )));
    }
    let air = links.air_rate_bps();
    if air <= 0.0 || links.backhaul_bps <= 0.0 {
        return Ok(LatencyBreakdown {
            upload_s: f64::INFINITY,
            compute_s: f64::INFINITY,
            download_s: f64::INFINITY,
            total_s: f64::INFINITY,
            mode: Mode::Relay,
        });
    }
    let k = chunks.max(1) as f64;
    let costs = [
        task.stages[0].cycles / nodes.uav.frequency_hz,
        task.stages[0].out_bits / air,
        task.stages[1].cycles / nodes.edge.frequency_hz,
        task.stages[1].out_bits / links.backhaul_bps,
        task.stages[2].cycles / nodes.cloud.frequency_hz,
    ];
    let per_chunk: Vec<f64> = costs.iter().map(|c| c / k).collect();
    let first_pass: f64 = per_chunk.iter().sum();
    let bottleneck = per_chunk.iter().copied().fold(0.0, f64::max);
    let makespan = first_pass + (k - 1.0) * bottleneck;
    let ret = task.output_bits / links.backhaul_bps + task.output_bits / air;
    Ok(LatencyBreakdown {
        upload_s: costs[1] + costs[3],
        compute_s: costs[0] + costs[2] + costs[4],
        download_s: ret,
        total_s: makespan + ret,
        mode: Mode::Relay,
    })
}

/// Picks the execution mode with the smallest predicted response latency;
/// ties (within 1 ps) break toward local, then offload, then relay.
pub fn choose_mode(
    task: &TaskSpec,
    nodes: &Nodes,
    links: &LinkProfile,
    chunks: usize,
) -> LatencyBreakdown {
    let candidates = [
        latency_local(task, &nodes.uav),
        latency_pando(task, &nodes.edge, links),
        latency_pando(task, &nodes.cloud, links),
        latency_relay(task, nodes, links, chunks).unwrap_or(LatencyBreakdown {
            upload_s: f64::INFINITY,
            compute_s: f64::INFINITY,
            download_s: f64::INFINITY,
            total_s: f64::INFINITY,
            mode: Mode::Relay,
        }),
    ];
    let mut best = candidates[0];
    for c in &candidates[1..] {
        if c.total_s < best.total_s - 1e-12 {
            best = *c;
        }
    }
    best
}

/// Energy model constants.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EnergyParams {
    /// Effective switched-capacitance constant: a node at frequency `f`
    /// burns `kappa * f^2` joules per second of computing.
    pub kappa: f64,
    /// UAV radio transmit power (W).
    pub tx_power_w: f64,
}

impl Default for EnergyParams {
    fn default() -> Self {
        EnergyParams { kappa: 4e-19, tx_power_w: 1.0 }
    }
}

/// Energy of one execution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyEstimate {
    pub total_j: f64,
    /// The share drawn from the UAV battery.
    pub uav_j: f64,
}

/// Compute energy is `kappa f^2 * (cycles / f)` per executing node; the
/// UAV additionally pays transmit power over its air-interface transfer
/// time.
pub fn energy_estimate(
    task: &TaskSpec,
    breakdown: &LatencyBreakdown,
    nodes: &Nodes,
    links: &LinkProfile,
    params: &EnergyParams,
) -> EnergyEstimate {
    let compute_energy = |f: f64, cycles: f64| params.kappa * f * cycles;
    let air = links.air_rate_bps();
    match breakdown.mode {
        Mode::Local => {
            let e = compute_energy(nodes.uav.frequency_hz, task.total_cycles);
            EnergyEstimate { total_j: e, uav_j: e }
        }
        Mode::Pando(role) => {
            let f = match role {
                Role::Uav => nodes.uav.frequency_hz,
                Role::Edge => nodes.edge.frequency_hz,
                Role::Cloud => nodes.cloud.frequency_hz,
            };
            let exec = compute_energy(f, task.total_cycles);
            let air_time = (task.input_bits + task.output_bits) / air;
            let uav = params.tx_power_w * air_time;
            EnergyEstimate { total_j: exec + uav, uav_j: uav }
        }
        Mode::Relay => {
            let e_uav = compute_energy(nodes.uav.frequency_hz, task.stages[0].cycles);
            let e_edge = compute_energy(nodes.edge.frequency_hz, task.stages[1].cycles);
            let e_cloud = compute_energy(nodes.cloud.frequency_hz, task.stages[2].cycles);
            let air_time = (task.stages[0].out_bits + task.output_bits) / air;
            let uav = e_uav + params.tx_power_w * air_time;
            EnergyEstimate { total_j: uav + e_edge + e_cloud, uav_j: uav }
        }
    }
}

/// The calibrated reference workload: its numbers are chosen so the local
/// and edge-offload anchors come out exactly.
pub fn reference_task() -> TaskSpec {
    let input_bits = 1_514_464.0;
    let output_bits = 20_000.0;
    let total_cycles = 1.082e9;
    TaskSpec {
        input_bits,
        total_cycles,
        output_bits,
        stages: vec![
            Stage { cycles: 0.135 * total_cycles, out_bits: 0.10 * input_bits },
            Stage { cycles: 0.615 * total_cycles, out_bits: 0.02 * input_bits },
            Stage { cycles: 0.25 * total_cycles, out_bits: output_bits },
        ],
    }
}

/// Reference tiers: 2 Gcycles/s on board, 40 at the edge, 100 in the cloud.
pub fn reference_nodes() -> Nodes {
    Nodes {
        uav: NodeProfile { role: Role::Uav, frequency_hz: 2e9 },
        edge: NodeProfile { role: Role::Edge, frequency_hz: 40e9 },
        cloud: NodeProfile { role: Role::Cloud, frequency_hz: 100e9 },
    }
}

/// Reference link: 15.36 MHz at an SNR giving exactly twice the bandwidth
/// as rate, and a 1 Gb/s backhaul.
pub fn reference_links() -> LinkProfile {
    LinkProfile { bandwidth_hz: 15.36e6, snr_linear: 3.0, backhaul_bps: 1e9 }
}

#[cfg(test)]
mod tests {
    use super::*;

    const REF_CHUNKS: usize = 16;

    #[test]
    fn reference_task_is_valid() {
        reference_task().validate().unwrap();
    }

    #[test]
    fn local_latency_reference_points() {
        let nodes = reference_nodes();
        let task = reference_task();
        let zero = TaskSpec { total_cycles: 0.0, stages: vec![], ..task.clone() };
        assert_eq!(latency_local(&zero, &nodes.uav).total_s, 0.0);

        // the calibrated anchor holds exactly
        let lb = latency_local(&task, &nodes.uav);
        assert_eq!(lb.total_s, 0.541);
        assert_eq!(lb.total_s, lb.upload_s + lb.compute_s + lb.download_s);

        // doubling frequency halves the latency exactly
        let fast = NodeProfile { role: Role::Uav, frequency_hz: 4e9 };
        assert_eq!(latency_local(&task, &fast).total_s, 0.541 / 2.0);
    }

    #[test]
    fn pando_latency_reference_points() {
        let nodes = reference_nodes();
        let links = reference_links();
        let task = reference_task();

        // pure-compute when nothing moves
        let weightless = TaskSpec { input_bits: 0.0, output_bits: 0.0, ..task.clone() };
        let lb = latency_pando(&weightless, &nodes.edge, &links);
        assert_eq!(lb.total_s, lb.compute_s);

        // huge rate: the transfer legs vanish
        let fat = LinkProfile { bandwidth_hz: 1e18, snr_linear: 3.0, backhaul_bps: 1e18 };
        let lb = latency_pando(&task, &nodes.edge, &fat);
        assert!((lb.total_s - lb.compute_s) < 1e-9);

        // the calibrated edge anchor: 49.95 ms of transfer + 27.05 ms of
        // compute; equality up to f64 rounding of the separate legs
        let lb = latency_pando(&task, &nodes.edge, &links);
        assert!((lb.total_s - 0.077).abs() < 1e-12, "total {}", lb.total_s);
        assert_eq!(lb.total_s, lb.upload_s + lb.compute_s + lb.download_s);

        // which is at least an 85% cut against local execution
        let local = latency_local(&task, &nodes.uav);
        let reduction = 1.0 - lb.total_s / local.total_s;
        assert!(reduction >= 0.85, "reduction {reduction}");

        // dead link reports unreachable
        let dead = LinkProfile { bandwidth_hz: 1.0, snr_linear: 0.0, backhaul_bps: 1e9 };
        assert!(latency_pando(&task, &nodes.edge, &dead).total_s.is_infinite());
    }

    /// Event-driven schedule of the same pipeline: stage `r` starts chunk
    /// `c` when both the previous stage has finished that chunk and it has
    /// finished the previous chunk.
    fn discrete_event_makespan(per_chunk: &[f64], chunks: usize) -> f64 {
        let mut done = vec![vec![0.0f64; chunks]; per_chunk.len()];
        for r in 0..per_chunk.len() {
            for c in 0..chunks {
                let ready_input = if r == 0 { 0.0 } else { done[r - 1][c] };
                let ready_self = if c == 0 { 0.0 } else { done[r][c - 1] };
                done[r][c] = ready_input.max(ready_self) + per_chunk[r];
            }
        }
        done[per_chunk.len() - 1][chunks - 1]
    }

    #[test]
    fn relay_matches_discrete_event_oracle() {
        let nodes = reference_nodes();
        let task = reference_task();
        for (bw, edge_f) in [(15.36e6, 40e9), (1.92e6, 5e9), (7.68e6, 10e9)] {
            let links = LinkProfile { bandwidth_hz: bw, snr_linear: 3.0, backhaul_bps: 1e9 };
            let nodes = Nodes {
                edge: NodeProfile { role: Role::Edge, frequency_hz: edge_f },
                ..nodes
            };
            for chunks in [1usize, 2, 7, 16, 64] {
                let lb = latency_relay(&task, &nodes, &links, chunks).unwrap();
                let air = links.air_rate_bps();
                let per_chunk: Vec<f64> = [
                    task.stages[0].cycles / nodes.uav.frequency_hz,
                    task.stages[0].out_bits / air,
                    task.stages[1].cycles / nodes.edge.frequency_hz,
                    task.stages[1].out_bits / links.backhaul_bps,
                    task.stages[2].cycles / nodes.cloud.frequency_hz,
                ]
                .iter()
                .map(|c| c / chunks as f64)
                .collect();
                let oracle = discrete_event_makespan(&per_chunk, chunks)
                    + task.output_bits / links.backhaul_bps
                    + task.output_bits / air;
                assert!(
                    (lb.total_s - oracle).abs() < 1e-12 * oracle,
                    "chunks {chunks}: {} vs {}",
                    lb.total_s,
                    oracle
                );
            }
        }
    }

    #[test]
    fn single_chunk_is_the_plain_sequence() {
        let task = reference_task();
        let lb = latency_relay(&task, &reference_nodes(), &reference_links(), 1).unwrap();
        let expect = lb.upload_s + lb.compute_s + lb.download_s;
        assert!((lb.total_s - expect).abs() < 1e-12);
    }

    #[test]
    fn chunking_never_hurts() {
        let task = reference_task();
        let nodes = reference_nodes();
        let links = reference_links();
        let mut prev = f64::INFINITY;
        for chunks in 1..=64usize {
            let t = latency_relay(&task, &nodes, &links, chunks).unwrap().total_s;
            assert!(t <= prev + 1e-12, "chunks {chunks}");
            prev = t;
        }
    }

    #[test]
    fn relay_beats_pando_when_starved() {
        let task = reference_task();
        let nodes = Nodes {
            edge: NodeProfile { role: Role::Edge, frequency_hz: 5e9 },
            ..reference_nodes()
        };
        let links = LinkProfile { bandwidth_hz: 1.92e6, snr_linear: 3.0, backhaul_bps: 1e9 };
        let relay = latency_relay(&task, &nodes, &links, REF_CHUNKS).unwrap();
        let pando = latency_pando(&task, &nodes.edge, &links);
        assert!(relay.total_s < pando.total_s, "{} vs {}", relay.total_s, pando.total_s);
    }

    #[test]
    fn relay_converges_to_pando_when_rich() {
        let task = reference_task();
        let relay =
            latency_relay(&task, &reference_nodes(), &reference_links(), REF_CHUNKS).unwrap();
        let pando = latency_pando(&task, &reference_nodes().edge, &reference_links());
        let gap = (relay.total_s - pando.total_s).abs() / pando.total_s;
        assert!(gap <= 0.05, "gap {gap}");
    }

    #[test]
    fn pando_monotone_in_capacity_and_rate() {
        let task = reference_task();
        let mut prev = f64::INFINITY;
        for f in [5e9, 10e9, 20e9, 40e9, 80e9] {
            let t = latency_pando(
                &task,
                &NodeProfile { role: Role::Edge, frequency_hz: f },
                &reference_links(),
            )
            .total_s;
            assert!(t <= prev);
            prev = t;
        }
        let mut prev = f64::INFINITY;
        for bw in [1.92e6, 3.84e6, 7.68e6, 15.36e6] {
            let links = LinkProfile { bandwidth_hz: bw, snr_linear: 3.0, backhaul_bps: 1e9 };
            let t = latency_pando(&task, &reference_nodes().edge, &links).total_s;
            assert!(t <= prev);
            prev = t;
        }
    }

    #[test]
    fn mode_choice_reference_points() {
        let task = reference_task();
        let nodes = reference_nodes();

        // dead links force local execution
        let dead = LinkProfile { bandwidth_hz: 1.0, snr_linear: 0.0, backhaul_bps: 0.0 };
        assert_eq!(choose_mode(&task, &nodes, &dead, REF_CHUNKS).mode, Mode::Local);

        // absurdly fast edge and links dominate local; ties break to pando
        let rich = Nodes {
            edge: NodeProfile { role: Role::Edge, frequency_hz: 1e18 },
            cloud: NodeProfile { role: Role::Cloud, frequency_hz: 1e18 },
            ..nodes
        };
        let fat = LinkProfile { bandwidth_hz: 1e15, snr_linear: 3.0, backhaul_bps: 1e18 };
        let choice = choose_mode(&task, &rich, &fat, REF_CHUNKS);
        assert!(matches!(choice.mode, Mode::Pando(_)));

        // crossover: relay at starved resources, pando at rich ones
        let starved_nodes = Nodes {
            edge: NodeProfile { role: Role::Edge, frequency_hz: 5e9 },
            ..nodes
        };
        let starved_links = LinkProfile { bandwidth_hz: 1.92e6, snr_linear: 3.0, backhaul_bps: 1e9 };
        assert_eq!(choose_mode(&task, &starved_nodes, &starved_links, REF_CHUNKS).mode, Mode::Relay);
        assert!(matches!(
            choose_mode(&task, &nodes, &reference_links(), REF_CHUNKS).mode,
            Mode::Pando(_)
        ));

        // the chosen mode is never beaten by another candidate
        let best = choose_mode(&task, &nodes, &reference_links(), REF_CHUNKS);
        for other in [
            latency_local(&task, &nodes.uav),
            latency_pando(&task, &nodes.edge, &reference_links()),
            latency_pando(&task, &nodes.cloud, &reference_links()),
            latency_relay(&task, &nodes, &reference_links(), REF_CHUNKS).unwrap(),
        ] {
            assert!(best.total_s <= other.total_s + 1e-12);
        }
    }

    #[test]
    fn energy_reference_points() {
        let params = EnergyParams::default();
        let nodes = reference_nodes();
        let links = reference_links();
        let task = reference_task();

        // nothing to do, nothing to pay
        let idle = TaskSpec {
            input_bits: 0.0,
            total_cycles: 0.0,
            output_bits: 0.0,
            stages: vec![
                Stage { cycles: 0.0, out_bits: 0.0 },
                Stage { cycles: 0.0, out_bits: 0.0 },
                Stage { cycles: 0.0, out_bits: 0.0 },
            ],
        };
        let lb = latency_local(&idle, &nodes.uav);
        assert_eq!(energy_estimate(&idle, &lb, &nodes, &links, &params).total_j, 0.0);

        // offloading spares the battery
        let local = latency_local(&task, &nodes.uav);
        let e_local = energy_estimate(&task, &local, &nodes, &links, &params);
        let pando = latency_pando(&task, &nodes.edge, &links);
        let e_pando = energy_estimate(&task, &pando, &nodes, &links, &params);
        assert!(
            e_pando.uav_j < e_local.uav_j,
            "pando uav {} vs local {}",
            e_pando.uav_j,
            e_local.uav_j
        );

        // doubling the frequency doubles the energy at fixed cycles
        let fast = Nodes { uav: NodeProfile { role: Role::Uav, frequency_hz: 4e9 }, ..nodes };
        let e_fast = energy_estimate(&task, &latency_local(&task, &fast.uav), &fast, &links, &params);
        assert!((e_fast.total_j - 2.0 * e_local.total_j).abs() < 1e-12 * e_local.total_j);
    }
}
