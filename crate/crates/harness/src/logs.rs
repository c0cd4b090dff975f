//! CSV log schemas (one file per channel) and their readers.
//!
//! Columns are stable contracts: replay and external plotting pipelines
//! parse them. Floats are written in shortest round-trip form, so logs are
//! byte-identical across runs of the same seed.

use serde::{Deserialize, Serialize};
use swarm_core::{DroneId, Vec3};

use crate::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruthRow {
    pub tick: u64,
    pub drone: usize,
    pub px: f64,
    pub py: f64,
    pub pz: f64,
    pub vx: f64,
    pub vy: f64,
    pub vz: f64,
    pub yaw: f64,
    pub camera_angle: f64,
}

impl TruthRow {
    pub fn position(&self) -> Vec3 {
        Vec3::new(self.px, self.py, self.pz)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VisionRow {
    pub tick: u64,
    pub observer: usize,
    pub target: usize,
    pub rel_x: f64,
    pub rel_y: f64,
    pub rel_z: f64,
}

impl VisionRow {
    pub fn relative_position(&self) -> Vec3 {
        Vec3::new(self.rel_x, self.rel_y, self.rel_z)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UwbRow {
    pub tick: u64,
    pub drone_a: usize,
    pub drone_b: usize,
    pub distance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VioRow {
    pub tick: u64,
    pub drone: usize,
    pub disp_x: f64,
    pub disp_y: f64,
    pub disp_z: f64,
    pub vel_x: f64,
    pub vel_y: f64,
    pub vel_z: f64,
}

impl VioRow {
    pub fn displacement(&self) -> Vec3 {
        Vec3::new(self.disp_x, self.disp_y, self.disp_z)
    }

    pub fn velocity(&self) -> Vec3 {
        Vec3::new(self.vel_x, self.vel_y, self.vel_z)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateRow {
    pub tick: u64,
    pub owner: usize,
    pub target: usize,
    pub est_x: f64,
    pub est_y: f64,
    pub est_z: f64,
    pub stale: bool,
    pub iterations: usize,
    pub cost: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControlRow {
    pub tick: u64,
    pub drone: usize,
    pub ux: f64,
    pub uy: f64,
    pub uz: f64,
    pub pd_only: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlannerRow {
    pub tick: u64,
    pub observer: usize,
    pub target: usize,
    pub camera_cmd: f64,
    pub reachable: bool,
}

pub(crate) fn write_csv<T: Serialize>(rows: &[T]) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    for row in rows {
        writer.serialize(row).expect("csv serialization of plain rows cannot fail");
    }
    String::from_utf8(writer.into_inner().expect("in-memory writer")).expect("csv is utf-8")
}

fn read_csv<T: for<'de> Deserialize<'de>>(text: &str, what: &str) -> Result<Vec<T>, HarnessError> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for record in reader.deserialize() {
        rows.push(record.map_err(|e| HarnessError::Csv(format!("{what}: {e}")))?);
    }
    Ok(rows)
}

pub fn read_truth_csv(text: &str) -> Result<Vec<TruthRow>, HarnessError> {
    read_csv(text, "truth log")
}

pub fn read_vision_csv(text: &str) -> Result<Vec<VisionRow>, HarnessError> {
    read_csv(text, "vision log")
}

pub fn read_uwb_csv(text: &str) -> Result<Vec<UwbRow>, HarnessError> {
    read_csv(text, "uwb log")
}

pub fn read_vio_csv(text: &str) -> Result<Vec<VioRow>, HarnessError> {
    read_csv(text, "vio log")
}

pub(crate) fn drone(id: DroneId) -> usize {
    id.index()
}
