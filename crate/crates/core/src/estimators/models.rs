use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::array::SECTOR_COUNT;
use crate::error::{Error, Result};
use crate::neural::{as_beam_count, Mlp, Task, TrainReport};

use super::AoaInput;

/// One network per angle sector for a single task.
#[derive(Debug, Clone, PartialEq)]
pub struct SectorModels {
    pub task: Task,
    pub beams_per_sector: usize,
    pub aoa_input: AoaInput,
    /// Spread range used to encode targets, degrees.
    pub sigma_range: (f64, f64),
    nets: Vec<Option<Mlp>>,
    reports: Vec<Option<TrainReport>>,
}

/// Manifest of a model directory; each sector's network lives in its own
/// JSON file next to it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelManifest {
    pub task: Task,
    pub beams_per_sector: usize,
    pub aoa_input: AoaInput,
    pub sigma_min: f64,
    pub sigma_max: f64,
    pub sectors: Vec<SectorEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectorEntry {
    pub sector: usize,
    pub file: String,
    pub layer_sizes: Vec<usize>,
    pub training: Option<TrainReport>,
}

pub const MANIFEST_FILE: &str = "manifest.json";

impl SectorModels {
    pub fn empty(task: Task, beams_per_sector: usize) -> Self {
        Self {
            task,
            beams_per_sector,
            aoa_input: AoaInput::Normalized,
            sigma_range: (0.6, 3.0),
            nets: vec![None; SECTOR_COUNT],
            reports: vec![None; SECTOR_COUNT],
        }
    }

    pub fn as_beam_count(&self) -> usize {
        as_beam_count(self.beams_per_sector).unwrap_or(self.beams_per_sector)
    }

    fn expected_inputs(&self) -> usize {
        match self.task {
            Task::Aoa => self.beams_per_sector,
            Task::As => 2 * self.as_beam_count(),
        }
    }

    pub fn set(&mut self, sector: usize, net: Mlp) -> Result<()> {
        if sector >= SECTOR_COUNT {
            return Err(Error::IndexOutOfRange {
                index: sector,
                len: SECTOR_COUNT,
            });
        }
        if net.n_inputs() != self.expected_inputs() || net.n_outputs() != 1 {
            return Err(Error::dim(format!(
                "{} network for sector {sector} must map {} inputs to 1 output",
                self.task.name(),
                self.expected_inputs()
            )));
        }
        self.nets[sector] = Some(net);
        Ok(())
    }

    pub fn set_report(&mut self, sector: usize, report: TrainReport) {
        self.reports[sector] = Some(report);
    }

    pub fn report(&self, sector: usize) -> Option<&TrainReport> {
        self.reports.get(sector).and_then(Option::as_ref)
    }

    pub fn net(&self, sector: usize) -> Result<&Mlp> {
        self.nets
            .get(sector)
            .and_then(Option::as_ref)
            .ok_or(Error::MissingNetwork(sector))
    }

    pub fn is_complete(&self) -> bool {
        self.nets.iter().all(Option::is_some)
    }

    /// Forward-pass multiply-accumulates of a sector's network.
    pub fn forward_macs(&self, sector: usize) -> Result<usize> {
        Ok(self.net(sector)?.forward_macs())
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let mut sectors = Vec::new();
        for (s, net) in self.nets.iter().enumerate() {
            let Some(net) = net else { continue };
            let file = format!("{}_sector{}.json", self.task.name(), s + 1);
            net.save(&dir.join(&file))?;
            sectors.push(SectorEntry {
                sector: s,
                file,
                layer_sizes: net.layer_sizes().to_vec(),
                training: self.reports[s].clone(),
            });
        }
        let manifest = ModelManifest {
            task: self.task,
            beams_per_sector: self.beams_per_sector,
            aoa_input: self.aoa_input,
            sigma_min: self.sigma_range.0,
            sigma_max: self.sigma_range.1,
            sectors,
        };
        std::fs::write(
            dir.join(MANIFEST_FILE),
            serde_json::to_string_pretty(&manifest)?,
        )?;
        Ok(())
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let manifest: ModelManifest =
            serde_json::from_str(&std::fs::read_to_string(dir.join(MANIFEST_FILE))?)?;
        let mut out = SectorModels::empty(manifest.task, manifest.beams_per_sector);
        out.aoa_input = manifest.aoa_input;
        out.sigma_range = (manifest.sigma_min, manifest.sigma_max);
        for entry in manifest.sectors {
            let net = Mlp::load(&dir.join(&entry.file))?;
            if net.layer_sizes() != entry.layer_sizes.as_slice() {
                return Err(Error::dim(format!(
                    "{} does not match its manifest layer sizes",
                    entry.file
                )));
            }
            out.set(entry.sector, net)?;
            if let Some(r) = entry.training {
                out.set_report(entry.sector, r);
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neural::architectures;

    #[test]
    fn bundle_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let mut m = SectorModels::empty(Task::As, 8);
        m.sigma_range = (0.5, 2.5);
        for (s, sizes) in architectures(8, Task::As).unwrap().iter().enumerate() {
            m.set(s, Mlp::seeded(sizes, s as u64).unwrap()).unwrap();
        }
        m.save(dir.path()).unwrap();
        let back = SectorModels::load(dir.path()).unwrap();
        assert_eq!(back, m);
        assert!(back.is_complete());
    }

    #[test]
    fn wrong_shape_rejected() {
        let mut m = SectorModels::empty(Task::Aoa, 8);
        assert!(m.set(0, Mlp::seeded(&[4, 2, 1], 0).unwrap()).is_err());
        assert!(m.set(8, Mlp::seeded(&[8, 2, 1], 0).unwrap()).is_err());
        assert!(!m.is_complete());
    }
}
