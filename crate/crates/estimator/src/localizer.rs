//! Per-drone online relative localization.
//!
//! One `RelativeLocalizer` runs on each drone. It ingests the drone's own
//! measurements plus whatever arrives over the bus, collects static windows
//! during the initialization phase, and afterwards produces one joint
//! nonlinear least-squares solve per estimator frame, warm-started from the
//! previous frame. Instances share nothing; identical delivered-message sets
//! reproduce identical estimates regardless of scheduling.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use swarm_core::{DroneId, EstimatorConfig, ResidualWeights, Timestamp, Vec3};

use sensor_sim::{BusMessage, Payload, UwbRange, VioSample, VisionDetection};

use crate::init::{initialize, InitError, PairWindow};
use crate::residual::{FusionProblem, ResidualBlock};
use crate::savgol::CausalSg;
use crate::solver::{solve, SolverReport};

/// Residual-channel ablations applied to the per-frame fusion (the
/// initialization window always keeps every channel).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ablations {
    pub no_vision: bool,
    pub no_uwb: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateEntry {
    pub relative_position: Vec3,
    /// True once the pair has gone `stale_limit_frames` without data; the
    /// controller excludes stale pairs from its consensus sum.
    pub stale: bool,
}

/// Drone `owner`'s estimate of every other drone, in its local frame.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RelativeEstimate {
    pub owner: DroneId,
    pub timestamp: Timestamp,
    pub entries: BTreeMap<DroneId, EstimateEntry>,
}

impl RelativeEstimate {
    pub fn position_of(&self, target: DroneId) -> Option<Vec3> {
        self.entries.get(&target).map(|e| e.relative_position)
    }
}

/// Everything one fusion frame sees, assembled by the localizer and consumed
/// by [`build_residuals`]. Kept as a plain view so the residual layer stays
/// testable in isolation.
pub struct FrameInputs<'a> {
    pub owner: DroneId,
    /// Time between estimator frames.
    pub frame_dt: f64,
    /// Own detections of this frame's window, newest last.
    pub own_detections: &'a [VisionDetection],
    /// Communicated detections of the owner by peers, newest last.
    pub peer_detections: &'a [VisionDetection],
    /// Savitzky-Golay-filtered range per pair that ranged this frame.
    pub filtered_ranges: &'a BTreeMap<DroneId, f64>,
    /// Latest own odometry sample.
    pub own_vio: Option<&'a VioSample>,
    /// Last received odometry sample per peer (held across frames).
    pub peer_vio: &'a BTreeMap<DroneId, VioSample>,
    /// Own displacement at initialization, subtracted from later samples.
    pub own_vio_origin: Vec3,
    pub peer_vio_origin: &'a BTreeMap<DroneId, Vec3>,
    /// Initial relative positions from the static window.
    pub initial: &'a BTreeMap<DroneId, Vec3>,
    /// Previous frame's estimates (warm start and motion-prior anchor).
    pub previous: &'a BTreeMap<DroneId, Vec3>,
    pub weights: &'a ResidualWeights,
    pub ablations: Ablations,
}

/// Emits the residual blocks present at this frame, pair by pair in
/// ascending id order. Absent channels simply omit their block.
pub fn build_residuals(inputs: &FrameInputs<'_>) -> Vec<ResidualBlock> {
    let mut blocks = Vec::new();
    let mut pairs: BTreeSet<DroneId> = inputs.previous.keys().copied().collect();
    pairs.extend(inputs.initial.keys().copied());

    for &j in &pairs {
        if !inputs.ablations.no_vision {
            // Latest own detection of j within the frame window.
            if let Some(det) =
                inputs.own_detections.iter().rev().find(|d| d.target == j)
            {
                blocks.push(ResidualBlock::vision(j, det.relative_position, inputs.weights.vision));
            }
            // Latest communicated detection of the owner by j; aligned
            // frames make p_ji the negated relative position.
            if let Some(det) =
                inputs.peer_detections.iter().rev().find(|d| d.observer == j)
            {
                blocks.push(ResidualBlock::vision_reciprocal(
                    j,
                    det.relative_position,
                    inputs.weights.vision_reciprocal,
                ));
            }
        }
        if !inputs.ablations.no_uwb {
            if let Some(&d) = inputs.filtered_ranges.get(&j) {
                blocks.push(ResidualBlock::uwb(j, d, inputs.weights.uwb));
            }
        }
        // Relative position deduced from odometry displacements since
        // initialization.
        if let (Some(own), Some(peer), Some(&x0)) =
            (inputs.own_vio, inputs.peer_vio.get(&j), inputs.initial.get(&j))
        {
            let peer_origin = inputs.peer_vio_origin.get(&j).copied().unwrap_or(Vec3::ZERO);
            let deduced =
                x0 + (peer.displacement - peer_origin) - (own.displacement - inputs.own_vio_origin);
            blocks.push(ResidualBlock::vio(j, deduced, inputs.weights.vio));
        }
        // First-order expectation from the previous frame; uses the
        // last-known peer velocity, so it persists through communication
        // gaps.
        if let (Some(own), Some(peer), Some(&prev)) =
            (inputs.own_vio, inputs.peer_vio.get(&j), inputs.previous.get(&j))
        {
            let predicted = prev + (peer.velocity - own.velocity) * inputs.frame_dt;
            blocks.push(ResidualBlock::motion_prior(j, predicted, inputs.weights.motion_prior));
        }
    }
    blocks
}

#[derive(Debug, Clone)]
pub struct RelativeLocalizer {
    owner: DroneId,
    cfg: EstimatorConfig,
    ablations: Ablations,
    frame_dt: f64,
    sg: CausalSg,
    initialized: bool,
    // Static-window collection (pre-initialization).
    init_windows: BTreeMap<DroneId, PairWindow>,
    // Per-frame intake buffers.
    pending_own: Vec<VisionDetection>,
    pending_peer: Vec<VisionDetection>,
    ranged_this_frame: BTreeSet<DroneId>,
    peer_heard_this_frame: BTreeSet<DroneId>,
    // Held state.
    own_vio: Option<VioSample>,
    peer_vio: BTreeMap<DroneId, VioSample>,
    own_vio_origin: Vec3,
    peer_vio_origin: BTreeMap<DroneId, Vec3>,
    range_history: BTreeMap<DroneId, Vec<f64>>,
    initial: BTreeMap<DroneId, Vec3>,
    previous: BTreeMap<DroneId, Vec3>,
    last_data_frame: BTreeMap<DroneId, u64>,
    frame: u64,
}

impl RelativeLocalizer {
    pub fn new(owner: DroneId, n_drones: usize, cfg: EstimatorConfig, ablations: Ablations) -> Self {
        let sg = CausalSg::new(cfg.sg_window, cfg.sg_order)
            .expect("validated configuration: odd window, order < window");
        let peers = (0..n_drones).map(DroneId).filter(|&id| id != owner);
        RelativeLocalizer {
            owner,
            frame_dt: 1.0 / cfg.rate_hz,
            sg,
            cfg,
            ablations,
            initialized: false,
            init_windows: peers.map(|id| (id, PairWindow::default())).collect(),
            pending_own: Vec::new(),
            pending_peer: Vec::new(),
            ranged_this_frame: BTreeSet::new(),
            peer_heard_this_frame: BTreeSet::new(),
            own_vio: None,
            peer_vio: BTreeMap::new(),
            own_vio_origin: Vec3::ZERO,
            peer_vio_origin: BTreeMap::new(),
            range_history: BTreeMap::new(),
            initial: BTreeMap::new(),
            previous: BTreeMap::new(),
            last_data_frame: BTreeMap::new(),
            frame: 0,
        }
    }

    pub fn owner(&self) -> DroneId {
        self.owner
    }

    pub fn is_initialized(&self) -> bool {
        self.initialized
    }

    /// Ingests a detection made by the owner's own camera.
    pub fn observe(&mut self, detection: VisionDetection) {
        debug_assert_eq!(detection.observer, self.owner);
        if self.initialized {
            self.pending_own.push(detection);
        } else if let Some(window) = self.init_windows.get_mut(&detection.target) {
            window.own_detections.push(detection.relative_position);
        }
    }

    /// Ingests one delivered bus message.
    pub fn receive(&mut self, message: &BusMessage) {
        match message.payload {
            Payload::Vision(det) if det.target == self.owner => {
                self.peer_heard_this_frame.insert(det.observer);
                if self.initialized {
                    self.pending_peer.push(det);
                } else if let Some(window) = self.init_windows.get_mut(&det.observer) {
                    window.peer_detections.push(det.relative_position);
                }
            }
            Payload::Vision(_) => {}
            Payload::Vio(sample) => {
                self.peer_heard_this_frame.insert(sample.drone);
                self.peer_vio.insert(sample.drone, sample);
            }
            Payload::Estimate(_) => {}
        }
    }

    /// Ingests a pairwise range reading involving the owner.
    pub fn range(&mut self, range: &UwbRange) {
        let peer = if range.a == self.owner {
            range.b
        } else if range.b == self.owner {
            range.a
        } else {
            return;
        };
        if self.initialized {
            let history = self.range_history.entry(peer).or_default();
            history.push(range.distance);
            let window = self.sg.window();
            if history.len() > window {
                history.remove(0);
            }
            self.ranged_this_frame.insert(peer);
        } else if let Some(window) = self.init_windows.get_mut(&peer) {
            window.ranges.push(range.distance);
        }
    }

    /// Ingests the owner's own odometry sample.
    pub fn update_own_vio(&mut self, sample: VioSample) {
        debug_assert_eq!(sample.drone, self.owner);
        self.own_vio = Some(sample);
    }

    /// Closes the static window: solves every pair's initial position and
    /// anchors the odometry origins.
    pub fn finish_initialization(&mut self) -> Result<(), InitError> {
        let initial = initialize(self.owner, &self.init_windows, &self.cfg.lm)?;
        self.initial = initial.estimates;
        self.previous = self.initial.clone();
        self.own_vio_origin = self.own_vio.map(|s| s.displacement).unwrap_or(Vec3::ZERO);
        self.peer_vio_origin =
            self.peer_vio.iter().map(|(&id, s)| (id, s.displacement)).collect();
        for &peer in self.initial.keys() {
            self.last_data_frame.insert(peer, 0);
        }
        self.frame = 0;
        self.initialized = true;
        self.peer_heard_this_frame.clear();
        Ok(())
    }

    /// Runs one fusion frame over the data gathered since the last one.
    /// `frame_tick`/`tick_dt` stamp the produced estimate.
    pub fn estimate_step(&mut self, frame_tick: u64, tick_dt: f64) -> (RelativeEstimate, SolverReport) {
        assert!(self.initialized, "estimate_step requires completed initialization");
        self.frame += 1;

        // Savitzky-Golay over each pair's raw range history, evaluated at
        // the newest sample.
        let mut filtered_ranges = BTreeMap::new();
        for &peer in &self.ranged_this_frame {
            let history = &self.range_history[&peer];
            filtered_ranges.insert(peer, self.sg.latest(history));
        }

        let inputs = FrameInputs {
            owner: self.owner,
            frame_dt: self.frame_dt,
            own_detections: &self.pending_own,
            peer_detections: &self.pending_peer,
            filtered_ranges: &filtered_ranges,
            own_vio: self.own_vio.as_ref(),
            peer_vio: &self.peer_vio,
            own_vio_origin: self.own_vio_origin,
            peer_vio_origin: &self.peer_vio_origin,
            initial: &self.initial,
            previous: &self.previous,
            weights: &self.cfg.weights,
            ablations: self.ablations,
        };
        let blocks = build_residuals(&inputs);

        // Pairs with fresh data this frame keep their staleness clock.
        for det in &self.pending_own {
            self.last_data_frame.insert(det.target, self.frame);
        }
        for &peer in self.peer_heard_this_frame.iter().chain(&self.ranged_this_frame) {
            self.last_data_frame.insert(peer, self.frame);
        }

        let report = if blocks.is_empty() {
            // Nothing observed anywhere: every estimate carries forward.
            SolverReport {
                iterations: 0,
                initial_cost: 0.0,
                final_cost: 0.0,
                converged: true,
                wall_time_s: 0.0,
            }
        } else {
            let problem = FusionProblem::new(blocks, self.cfg.scalar_norm_residuals);
            let warm_start = problem.pack(|id| self.previous[&id]);
            let (solution, report) = solve(&problem, warm_start, &self.cfg.lm);
            for (id, estimate) in problem.unpack(&solution) {
                self.previous.insert(id, estimate);
            }
            report
        };

        let entries = self
            .previous
            .iter()
            .map(|(&id, &relative_position)| {
                let last = self.last_data_frame.get(&id).copied().unwrap_or(0);
                let stale = self.frame - last > self.cfg.stale_limit_frames;
                (id, EstimateEntry { relative_position, stale })
            })
            .collect();

        self.pending_own.clear();
        self.pending_peer.clear();
        self.ranged_this_frame.clear();
        self.peer_heard_this_frame.clear();

        let estimate = RelativeEstimate {
            owner: self.owner,
            timestamp: Timestamp::at(frame_tick, tick_dt),
            entries,
        };
        (estimate, report)
    }

    /// Current estimate map without running a frame (latest solved values).
    pub fn current(&self) -> &BTreeMap<DroneId, Vec3> {
        &self.previous
    }

    /// Own displacement since initialization per the odometry channel; the
    /// controller adds it to the configured start position to get its
    /// distributed own-position belief.
    pub fn own_position_offset(&self) -> Vec3 {
        self.own_vio.map(|s| s.displacement - self.own_vio_origin).unwrap_or(Vec3::ZERO)
    }

    /// Own velocity per the odometry channel.
    pub fn own_velocity(&self) -> Vec3 {
        self.own_vio.map(|s| s.velocity).unwrap_or(Vec3::ZERO)
    }
}
