//! Analytic estimation of security-mechanism overhead on the mapped
//! architecture: bus load, processor utilization, and per-channel path
//! latency. First-order estimates under a no-contention assumption; they
//! bound nothing, they compare design points.

use crate::diag::Diagnostic;
use crate::model::{ArchKind, Model};
use serde::Serialize;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PartitionError {
    #[error("unknown bus `{0}`")]
    UnknownBus(String),
    #[error("`{0}` is not a bus")]
    NotABus(String),
    #[error("unknown execution node `{0}`")]
    UnknownNode(String),
    #[error("`{0}` is not an execution node")]
    NotExecutionNode(String),
    #[error("unknown channel `{0}`")]
    UnknownChannel(String),
    #[error("task `{0}` is not mapped to any execution node")]
    UnmappedTask(String),
    #[error("node `{0}` has no capacity")]
    MissingCapacity(String),
}

pub const NO_CONTENTION_ASSUMPTION: &str =
    "first-order analytic estimate assuming no contention on buses or processors";

/// Fraction of the bus bandwidth consumed by every channel routed over it:
/// sum of (message_size + mac_bytes) * 8 * rate / capacity. Values above 1
/// mean the bus is overloaded.
pub fn bus_load(model: &Model, bus: &str) -> Result<f64, PartitionError> {
    let node = model
        .arch_node(bus)
        .ok_or_else(|| PartitionError::UnknownBus(bus.to_string()))?;
    if node.kind != ArchKind::Bus {
        return Err(PartitionError::NotABus(bus.to_string()));
    }
    let capacity = node
        .capacity
        .ok_or_else(|| PartitionError::MissingCapacity(bus.to_string()))?;
    let mut load = 0.0;
    for c in &model.channel_maps {
        if c.buses.iter().any(|b| b == bus) {
            load += (c.message_size + c.mac_bytes) as f64 * 8.0 * c.rate / capacity;
        }
    }
    Ok(load)
}

/// Fraction of the node's cycle budget consumed by its mapped tasks:
/// sum of (exec_cost + crypto_cycles) * rate / capacity.
pub fn cpu_utilization(model: &Model, node: &str) -> Result<f64, PartitionError> {
    let arch = model
        .arch_node(node)
        .ok_or_else(|| PartitionError::UnknownNode(node.to_string()))?;
    if !arch.kind.is_execution() {
        return Err(PartitionError::NotExecutionNode(node.to_string()));
    }
    let capacity = arch
        .capacity
        .ok_or_else(|| PartitionError::MissingCapacity(node.to_string()))?;
    let mut util = 0.0;
    for m in &model.task_maps {
        if m.node == node {
            if let Some(task) = model.task(&m.task) {
                util += (task.exec_cost + m.crypto_cycles) as f64 * task.rate / capacity;
            }
        }
    }
    Ok(util)
}

/// Traffic growth factor a channel pays for its authentication bytes:
/// (message_size + mac_bytes) / message_size. Bus load and latency scale by
/// exactly this factor.
pub fn mac_overhead_ratio(model: &Model, channel: &str) -> Result<f64, PartitionError> {
    let c = model
        .channel_map(channel)
        .ok_or_else(|| PartitionError::UnknownChannel(channel.to_string()))?;
    if c.message_size == 0 {
        return Ok(1.0);
    }
    Ok((c.message_size + c.mac_bytes) as f64 / c.message_size as f64)
}

/// One-message end-to-end estimate for a channel: transfer time over every
/// bus on its path plus the source task's per-activation processing time.
pub fn path_latency(model: &Model, channel: &str) -> Result<f64, PartitionError> {
    let c = model
        .channel_map(channel)
        .ok_or_else(|| PartitionError::UnknownChannel(channel.to_string()))?;
    let mut latency = 0.0;
    for bus in &c.buses {
        let node = model
            .arch_node(bus)
            .ok_or_else(|| PartitionError::UnknownBus(bus.to_string()))?;
        let capacity = node
            .capacity
            .ok_or_else(|| PartitionError::MissingCapacity(bus.to_string()))?;
        latency += (c.message_size + c.mac_bytes) as f64 * 8.0 / capacity;
    }
    let src = &c.from.0;
    let mapping = model
        .task_maps
        .iter()
        .find(|m| &m.task == src)
        .ok_or_else(|| PartitionError::UnmappedTask(src.clone()))?;
    let task = model
        .task(src)
        .ok_or_else(|| PartitionError::UnmappedTask(src.clone()))?;
    let cpu = model
        .arch_node(&mapping.node)
        .ok_or_else(|| PartitionError::UnknownNode(mapping.node.clone()))?;
    let capacity = cpu
        .capacity
        .ok_or_else(|| PartitionError::MissingCapacity(mapping.node.clone()))?;
    latency += (task.exec_cost + mapping.crypto_cycles) as f64 / capacity;
    Ok(latency)
}

#[derive(Debug, Clone, Serialize)]
pub struct PartitionReport {
    pub assumption: String,
    pub bus_loads: BTreeMap<String, f64>,
    pub cpu_utilization: BTreeMap<String, f64>,
    pub channel_latencies: BTreeMap<String, f64>,
}

/// Estimates for every bus, execution node and channel in the model, plus
/// warnings for overloaded resources.
pub fn estimate(model: &Model) -> (PartitionReport, Vec<Diagnostic>) {
    let mut report = PartitionReport {
        assumption: NO_CONTENTION_ASSUMPTION.to_string(),
        bus_loads: BTreeMap::new(),
        cpu_utilization: BTreeMap::new(),
        channel_latencies: BTreeMap::new(),
    };
    let mut warnings = Vec::new();
    for n in &model.arch_nodes {
        match n.kind {
            ArchKind::Bus => {
                if let Ok(load) = bus_load(model, &n.name) {
                    if load > 1.0 {
                        warnings.push(Diagnostic::warning(
                            format!("bus `{}` overloaded: estimated load {load:.4}", n.name),
                            n.span.clone(),
                        ));
                    }
                    report.bus_loads.insert(n.name.clone(), load);
                }
            }
            ArchKind::Cpu | ArchKind::HwAccelerator => {
                if let Ok(util) = cpu_utilization(model, &n.name) {
                    if util > 1.0 {
                        warnings.push(Diagnostic::warning(
                            format!(
                                "execution node `{}` overloaded: estimated utilization {util:.4}",
                                n.name
                            ),
                            n.span.clone(),
                        ));
                    }
                    report.cpu_utilization.insert(n.name.clone(), util);
                }
            }
            ArchKind::Memory => {}
        }
    }
    for c in &model.channel_maps {
        if let Ok(latency) = path_latency(model, &c.name) {
            report.channel_latencies.insert(c.name.clone(), latency);
        }
    }
    (report, warnings)
}
