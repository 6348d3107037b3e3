//! Seeded instance families.
//!
//! All randomness comes from `ChaCha8Rng::seed_from_u64(seed)`, which is
//! portable across platforms, so a seed pins an instance byte for byte.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{ChargingCost, Instance, QueueParams, Station};

/// Service rate assignment for generated instances.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ServiceRate {
    /// The same rate at every node-charge.
    Uniform(f64),
    /// `factor * N` at every node-charge.
    PerNode(f64),
    /// Explicit `[node][level - 1]` matrix.
    Matrix(Vec<Vec<f64>>),
}

/// Parameters of the large-instance family. Defaults reproduce the
/// reference settings: four levels, ten idle vehicles at distinct
/// node-charges, four stations of capacity four, three servers per
/// node-charge, demand uniform on `[0, 1]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub nodes: usize,
    pub levels: usize,
    pub idle_vehicles: usize,
    pub stations: usize,
    pub station_capacity: u32,
    pub theta: f64,
    pub max_servers: usize,
    pub big_m: f64,
    pub rho: Vec<f64>,
    pub lambda_max: f64,
    pub service_rate: ServiceRate,
    /// Travel time of each line segment is drawn from this range, minutes.
    pub segment_time: (f64, f64),
    pub charging_arc_cost: f64,
    pub seed: u64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            nodes: 10,
            levels: 4,
            idle_vehicles: 10,
            stations: 4,
            station_capacity: 4,
            theta: 0.2,
            max_servers: 3,
            big_m: 10_000.0,
            rho: vec![0.2236, 0.6416, 1.1576],
            lambda_max: 1.0,
            service_rate: ServiceRate::PerNode(1.0),
            segment_time: (1.0, 10.0),
            charging_arc_cost: 1.0,
            seed: 0,
        }
    }
}

impl GeneratorConfig {
    pub fn with_nodes(nodes: usize, seed: u64) -> Self {
        GeneratorConfig {
            nodes,
            seed,
            ..Default::default()
        }
    }
}

/// Evenly spaced station nodes: the `k`-th of `count` sits at
/// `ceil((2k + 1) N / (2 count))`, counted from one.
pub fn station_nodes(nodes: usize, count: usize) -> Vec<usize> {
    (0..count)
        .map(|k| ((2 * k + 1) * nodes).div_ceil(2 * count) - 1)
        .collect()
}

fn line_travel_times(positions: &[f64]) -> Vec<Vec<f64>> {
    positions
        .iter()
        .map(|a| positions.iter().map(|b| (a - b).abs()).collect())
        .collect()
}

fn line_arcs(nodes: usize) -> Vec<[usize; 2]> {
    (0..nodes.saturating_sub(1))
        .flat_map(|i| [[i, i + 1], [i + 1, i]])
        .collect()
}

/// Line network with bidirectional arcs between consecutive zones on every
/// level, stations spread evenly, demand and idle stock drawn from `seed`.
///
/// Draw order: segment times, then demand row by row, then the idle-stock
/// node-charges.
pub fn generate_instance(config: &GeneratorConfig) -> Result<Instance> {
    let n = config.nodes;
    let h = config.levels;
    if n == 0 || h == 0 {
        return Err(Error::Generator("nodes and levels must be positive".into()));
    }
    if n < config.stations {
        return Err(Error::Generator(format!(
            "{} stations do not fit on {n} nodes",
            config.stations
        )));
    }
    if config.idle_vehicles > n * h {
        return Err(Error::Generator(format!(
            "{} idle vehicles need distinct node-charges but there are only {}",
            config.idle_vehicles,
            n * h
        )));
    }
    if config.rho.len() < config.max_servers {
        return Err(Error::Generator("rho table shorter than max_servers".into()));
    }
    let (lo, hi) = config.segment_time;
    if !(lo >= 0.0 && hi >= lo) {
        return Err(Error::Generator(format!("bad segment time range [{lo}, {hi}]")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let mut positions = Vec::with_capacity(n);
    let mut at = 0.0;
    positions.push(at);
    for _ in 1..n {
        at += if hi > lo { rng.gen_range(lo..hi) } else { lo };
        positions.push(at);
    }
    let arrival_rate = (0..n)
        .map(|_| (0..h).map(|_| rng.gen::<f64>() * config.lambda_max).collect())
        .collect();
    let mut idle_stock = vec![vec![0u32; h]; n];
    for v in sample(&mut rng, n * h, config.idle_vehicles) {
        idle_stock[v / h][v % h] = 1;
    }
    let service_rate = match &config.service_rate {
        ServiceRate::Uniform(mu) => vec![vec![*mu; h]; n],
        ServiceRate::PerNode(f) => vec![vec![f * n as f64; h]; n],
        ServiceRate::Matrix(m) => m.clone(),
    };

    let instance = Instance {
        node_count: n,
        travel_time: line_travel_times(&positions),
        levels: h,
        charge_per_level: 1.0 / h as f64,
        stations: station_nodes(n, config.stations)
            .into_iter()
            .map(|node| Station {
                node,
                capacity: config.station_capacity,
            })
            .collect(),
        arrival_rate,
        service_rate,
        idle_stock,
        theta: config.theta,
        max_servers: config.max_servers,
        big_m: config.big_m,
        charging_arc_cost: ChargingCost::Uniform(config.charging_arc_cost),
        queue_params: QueueParams::Explicit {
            rho: config.rho[..config.max_servers].to_vec(),
        },
        spatial_arcs: Some(line_arcs(n)),
        charge_per_minute: None,
    };
    instance.validate()?;
    Ok(instance)
}

/// Six zones on a line, four levels, stations at the second and sixth zone
/// with `capacity` chargers each, and three idle vehicles at node-charges
/// `(2, 1)`, `(0, 2)` and `(1, 3)`. Demand is drawn uniformly from `[0, 5]`
/// except at `(2, 3)`, which is fixed at 3.8.
pub fn illustrative_instance(seed: u64, capacity: u32) -> Instance {
    let n = 6;
    let h = 4;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut arrival_rate: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..h).map(|_| (rng.gen::<f64>() * 5.0 * 100.0).round() / 100.0).collect())
        .collect();
    arrival_rate[2][2] = 3.8;
    let mut idle_stock = vec![vec![0u32; h]; n];
    idle_stock[2][0] = 1;
    idle_stock[0][1] = 1;
    idle_stock[1][2] = 1;
    let positions: Vec<f64> = (0..n).map(|i| 5.0 * i as f64).collect();
    Instance {
        node_count: n,
        travel_time: line_travel_times(&positions),
        levels: h,
        charge_per_level: 0.2,
        stations: [1, 5].iter().map(|&node| Station { node, capacity }).collect(),
        arrival_rate,
        service_rate: vec![vec![10.0; h]; n],
        idle_stock,
        theta: 0.2,
        max_servers: 3,
        big_m: 10_000.0,
        charging_arc_cost: ChargingCost::Uniform(1.0),
        queue_params: QueueParams::default(),
        spatial_arcs: Some(line_arcs(n)),
        charge_per_minute: None,
    }
}

/// Random instance small enough for exhaustive enumeration: two to four
/// zones, one or two levels, one or two idle vehicles and servers per
/// node-charge, complete topology.
pub fn tiny_instance(seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(2..=4usize);
    let h = rng.gen_range(1..=2usize);
    let b = rng.gen_range(1..=2usize);
    let c = rng.gen_range(1..=2usize);
    let positions: Vec<f64> = (0..n).map(|_| rng.gen_range(0..10) as f64).collect();
    let travel_time = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { 0.0 } else { (positions[i] - positions[j]).abs() + 1.0 })
                .collect()
        })
        .collect();
    let arrival_rate = (0..n)
        .map(|_| (0..h).map(|_| (rng.gen::<f64>() * 100.0).round() / 100.0).collect())
        .collect();
    let service_rate = (0..n)
        .map(|_| (0..h).map(|_| rng.gen_range(2..=12) as f64).collect())
        .collect();
    let mut idle_stock = vec![vec![0u32; h]; n];
    for _ in 0..b {
        let v = rng.gen_range(0..n * h);
        idle_stock[v / h][v % h] += 1;
    }
    let mut stations = Vec::new();
    for node in 0..n {
        if stations.len() < 2 && rng.gen_bool(0.4) {
            stations.push(Station {
                node,
                capacity: rng.gen_range(0..=2),
            });
        }
    }
    let theta = [0.2, 0.5, 1.0][rng.gen_range(0..3)];
    Instance {
        node_count: n,
        travel_time,
        levels: h,
        charge_per_level: 1.0 / h as f64,
        stations,
        arrival_rate,
        service_rate,
        idle_stock,
        theta,
        max_servers: c,
        big_m: 10_000.0,
        charging_arc_cost: ChargingCost::Uniform(1.0),
        queue_params: QueueParams::default(),
        spatial_arcs: None,
        charge_per_minute: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stations_spread_evenly() {
        assert_eq!(station_nodes(10, 4), vec![1, 3, 6, 8]);
        assert_eq!(station_nodes(8, 4), vec![0, 2, 4, 6]);
        assert_eq!(station_nodes(4, 4), vec![0, 1, 2, 3]);
    }

    #[test]
    fn defaults_follow_reference_settings() {
        let inst = generate_instance(&GeneratorConfig::with_nodes(10, 1)).unwrap();
        assert_eq!(inst.levels, 4);
        assert_eq!(inst.total_stock(), 10);
        assert_eq!(inst.origins().len(), 10);
        assert_eq!(inst.stations.len(), 4);
        assert!(inst.stations.iter().all(|s| s.capacity == 4));
        assert_eq!(inst.max_servers, 3);
        assert_eq!(inst.big_m, 10_000.0);
        assert_eq!(inst.theta, 0.2);
        assert_eq!(inst.spatial_arcs.as_ref().unwrap().len(), 18);
        assert!(inst.arrival_rate.iter().flatten().all(|&l| (0.0..1.0).contains(&l)));
        assert_eq!(inst.service_rate[0][0], 10.0);
    }

    #[test]
    fn same_seed_same_file() {
        let a = generate_instance(&GeneratorConfig::with_nodes(20, 7)).unwrap();
        let b = generate_instance(&GeneratorConfig::with_nodes(20, 7)).unwrap();
        assert_eq!(a.to_json(), b.to_json());
        let c = generate_instance(&GeneratorConfig::with_nodes(20, 8)).unwrap();
        assert_ne!(a.to_json(), c.to_json());
    }

    #[test]
    fn rejects_too_few_nodes() {
        assert!(generate_instance(&GeneratorConfig::with_nodes(3, 0)).is_err());
    }

    #[test]
    fn illustrative_layout() {
        let inst = illustrative_instance(0, 2);
        inst.validate().unwrap();
        assert_eq!(inst.vertex_count(), 24);
        assert_eq!(inst.total_stock(), 3);
        assert_eq!(inst.arrival_rate[2][2], 3.8);
        assert_eq!(inst.stations.iter().map(|s| s.node).collect::<Vec<_>>(), vec![1, 5]);
    }

    #[test]
    fn tiny_instances_stay_tiny() {
        for seed in 0..200 {
            let inst = tiny_instance(seed);
            inst.validate().unwrap();
            assert!(inst.node_count <= 4 && inst.levels <= 2);
            assert!(inst.total_stock() <= 2 && inst.max_servers <= 2);
        }
    }
}
