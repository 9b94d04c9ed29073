//! Downlink scheduling: each user is an arm with state
//! `(queue length, channel state, arrival state)`.
//!
//! One slot proceeds in a fixed order: the arrival state adds its packets
//! (queue clipped at capacity), a scheduled user is then served up to its
//! channel throughput, and finally the channel and arrival chains step.
//! The reward is the number of packets served.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mdp::{MdpModel, StateSpace};
use crate::rmab::{ArmModel, RmabModel};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelChain {
    pub transition: Vec<Vec<f64>>,
    /// Packets servable per slot at full power, per channel state.
    pub throughput: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArrivalChain {
    pub transition: Vec<Vec<f64>>,
    /// Packets arriving per slot, per arrival state.
    pub packets: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WirelessParams {
    pub discount: f64,
    pub users: usize,
    /// Per-slot budget: channels for binary scheduling, power units otherwise.
    pub channels: usize,
    pub queue_capacity: usize,
    pub channel: ChannelChain,
    pub arrival: ArrivalChain,
    /// Number of nonzero power levels; level `a` serves
    /// `ceil(throughput * a / power_levels)` packets. Defaults to 1 (on/off).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub power_levels: Option<usize>,
}

fn check_chain(field: &str, transition: &[Vec<f64>], values: usize) -> Result<()> {
    let bad = |message: String| Error::ConfigInvalid {
        field: field.to_string(),
        message,
    };
    let n = transition.len();
    if n == 0 {
        return Err(bad("chain has no states".into()));
    }
    if values != n {
        return Err(bad(format!("{values} per-state values for {n} states")));
    }
    for (i, row) in transition.iter().enumerate() {
        if row.len() != n {
            return Err(bad(format!("row {i} has {} entries, expected {n}", row.len())));
        }
        if row.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(bad(format!("row {i} has a negative or non-finite entry")));
        }
        let sum: f64 = row.iter().sum();
        if (sum - 1.0).abs() > crate::mdp::ROW_SUM_TOLERANCE {
            return Err(bad(format!("row {i} sum {sum} is not 1 within 1e-9")));
        }
    }
    Ok(())
}

/// Single-user arm over `(q, c, e)` with dims `[Q+1, C, E]`.
pub fn build_wireless_arm(p: &WirelessParams) -> Result<MdpModel> {
    check_chain("model.channel", &p.channel.transition, p.channel.throughput.len())?;
    check_chain("model.arrival", &p.arrival.transition, p.arrival.packets.len())?;
    let power = p.power_levels.unwrap_or(1);
    if power == 0 {
        return Err(Error::ConfigInvalid {
            field: "model.power_levels".into(),
            message: "must be at least 1".into(),
        });
    }
    let qmax = p.queue_capacity;
    let (nc, ne) = (p.channel.throughput.len(), p.arrival.packets.len());
    let space = StateSpace::new(vec![qmax + 1, nc, ne])?;
    let levels = power + 1;
    let mut rows = Vec::with_capacity(space.total_states() * levels);
    let mut rewards = Vec::with_capacity(space.total_states() * levels);
    for s in 0..space.total_states() {
        let coords = space.decode(s)?;
        let (q, c, e) = (coords[0], coords[1], coords[2]);
        let queued = (q + p.arrival.packets[e]).min(qmax);
        for a in 0..levels {
            let capacity = (p.channel.throughput[c] * a).div_ceil(power);
            let served = queued.min(capacity);
            let left = queued - served;
            let mut row = Vec::with_capacity(nc * ne);
            for (c2, &pc) in p.channel.transition[c].iter().enumerate() {
                for (e2, &pe) in p.arrival.transition[e].iter().enumerate() {
                    row.push((space.encode(&[left, c2, e2])?, pc * pe));
                }
            }
            rows.push(row);
            rewards.push(served as f64);
        }
    }
    MdpModel::from_sparse(space, levels, rows, rewards, p.discount)
}

pub fn build_wireless_rmab(p: &WirelessParams) -> Result<RmabModel> {
    if p.users == 0 {
        return Err(Error::ConfigInvalid {
            field: "model.users".into(),
            message: "must be at least 1".into(),
        });
    }
    let arm = build_wireless_arm(p)?;
    let arms = (0..p.users)
        .map(|i| ArmModel::new(format!("user{i}"), arm.clone()))
        .collect();
    RmabModel::new(arms, p.channels)
}
