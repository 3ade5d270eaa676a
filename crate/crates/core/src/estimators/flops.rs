use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Dnn,
    MusicDbf,
    MusicHbf,
    MaxbeamDbf,
    MaxbeamHbf,
    /// Spread network.
    DnnAs,
}

impl Method {
    pub const AOA: [Method; 5] = [
        Method::Dnn,
        Method::MusicDbf,
        Method::MusicHbf,
        Method::MaxbeamDbf,
        Method::MaxbeamHbf,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Dnn => "dnn",
            Method::MusicDbf => "music_dbf",
            Method::MusicHbf => "music_hbf",
            Method::MaxbeamDbf => "maxbeam_dbf",
            Method::MaxbeamHbf => "maxbeam_hbf",
            Method::DnnAs => "dnn_as",
        }
    }

    pub fn is_hybrid(self) -> bool {
        matches!(
            self,
            Method::Dnn | Method::MusicHbf | Method::MaxbeamHbf | Method::DnnAs
        )
    }

    /// Nominal cost of one estimate:
    ///
    /// | method | flops |
    /// |---|---|
    /// | dnn, dnn_as | `T_r·N_nodes` |
    /// | music_hbf | `N·N_sec·T_r + N²·T_r + N³ + N_grid·N` |
    /// | music_dbf | `N²·T_r + N³ + N_grid·N` |
    /// | maxbeam_hbf | `N·N_sec·T_r + N_grid·N·T_r` |
    /// | maxbeam_dbf | `N_grid·N·T_r` |
    pub fn nominal_flops(self, p: &FlopParams) -> u64 {
        let (n, ns, tr, g) = (p.n as u64, p.n_sec as u64, p.t_r as u64, p.n_grid as u64);
        match self {
            Method::Dnn | Method::DnnAs => tr * p.dnn_nodes as u64,
            Method::MusicHbf => n * ns * tr + n * n * tr + n * n * n + g * n,
            Method::MusicDbf => n * n * tr + n * n * n + g * n,
            Method::MaxbeamHbf => n * ns * tr + g * n * tr,
            Method::MaxbeamDbf => g * n * tr,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        [
            Method::Dnn,
            Method::MusicDbf,
            Method::MusicHbf,
            Method::MaxbeamDbf,
            Method::MaxbeamHbf,
            Method::DnnAs,
        ]
        .into_iter()
        .find(|m| m.name() == s)
        .ok_or_else(|| Error::InvalidArgument(format!("unknown method '{s}'")))
    }
}

/// Sizes entering the flop formulas. `dnn_nodes` is the network's weight
/// count, i.e. multiply-accumulates per forward pass.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlopParams {
    pub n: usize,
    pub n_sec: usize,
    pub t_r: usize,
    pub n_grid: usize,
    pub dnn_nodes: usize,
}

/// Accumulated flops and call counts per method.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FlopLedger {
    flops: BTreeMap<Method, u64>,
    calls: BTreeMap<Method, u64>,
}

impl FlopLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&mut self, method: Method, params: &FlopParams) -> u64 {
        let f = method.nominal_flops(params);
        *self.flops.entry(method).or_default() += f;
        *self.calls.entry(method).or_default() += 1;
        f
    }

    pub fn total(&self, method: Method) -> u64 {
        self.flops.get(&method).copied().unwrap_or(0)
    }

    pub fn calls(&self, method: Method) -> u64 {
        self.calls.get(&method).copied().unwrap_or(0)
    }

    /// Average flops per estimate.
    pub fn per_call(&self, method: Method) -> Option<f64> {
        let c = self.calls(method);
        (c > 0).then(|| self.total(method) as f64 / c as f64)
    }

    pub fn methods(&self) -> impl Iterator<Item = Method> + '_ {
        self.flops.keys().copied()
    }

    pub fn merge(&mut self, other: &FlopLedger) {
        for (m, f) in &other.flops {
            *self.flops.entry(*m).or_default() += f;
        }
        for (m, c) in &other.calls {
            *self.calls.entry(*m).or_default() += c;
        }
    }
}
