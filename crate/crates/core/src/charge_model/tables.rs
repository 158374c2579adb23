use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::clustering::Cluster;
use crate::error::{Error, Result};
use crate::ingest::DayType;
use crate::simulator::ChargeDecider;
use crate::time::SLOTS_PER_DAY;

pub const SOC_STATES: usize = 6;
const DAY_TYPES: usize = 2;

/// SOC state in `0..6`, using six bins of width 1/6 with `1.0` in the top bin.
pub fn discretize_soc(soc: f64) -> Result<usize> {
    if !(0.0..=1.0).contains(&soc) {
        return Err(Error::data(format!("SOC {soc} is outside [0, 1]")));
    }
    Ok(soc_bin(soc))
}

pub(crate) fn soc_bin(soc: f64) -> usize {
    ((soc * SOC_STATES as f64).floor().max(0.0) as usize).min(SOC_STATES - 1)
}

/// Fitted after-journey and independent charging probabilities.
///
/// `after_journey` is laid out `[d][t][k][s]` and `independent` `[d][t][s]`,
/// both row-major. The count tables hold the raw numerators and denominators
/// behind the unsmoothed probabilities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorTables {
    pub day_types: usize,
    pub slots: usize,
    pub n_clusters: usize,
    pub soc_states: usize,
    pub sigma: f64,
    pub after_journey: Vec<f64>,
    pub independent: Vec<f64>,
    pub after_opportunities: Vec<u64>,
    pub after_charges: Vec<u64>,
    pub independent_opportunities: Vec<u64>,
    pub independent_charges: Vec<u64>,
}

impl PosteriorTables {
    pub fn zeros(n_clusters: usize) -> Self {
        let aj = DAY_TYPES * SLOTS_PER_DAY * n_clusters * SOC_STATES;
        let ind = DAY_TYPES * SLOTS_PER_DAY * SOC_STATES;
        Self {
            day_types: DAY_TYPES,
            slots: SLOTS_PER_DAY,
            n_clusters,
            soc_states: SOC_STATES,
            sigma: 0.0,
            after_journey: vec![0.0; aj],
            independent: vec![0.0; ind],
            after_opportunities: vec![0; aj],
            after_charges: vec![0; aj],
            independent_opportunities: vec![0; ind],
            independent_charges: vec![0; ind],
        }
    }

    pub fn after_index(&self, d: usize, t: usize, k: usize, s: usize) -> usize {
        ((d * SLOTS_PER_DAY + t) * self.n_clusters + k) * SOC_STATES + s
    }

    pub fn independent_index(&self, d: usize, t: usize, s: usize) -> usize {
        (d * SLOTS_PER_DAY + t) * SOC_STATES + s
    }

    fn check(&self, t: usize, k: Option<Cluster>, s: usize) -> Result<()> {
        if t >= SLOTS_PER_DAY {
            return Err(Error::data(format!("slot {t} out of range")));
        }
        if s >= SOC_STATES {
            return Err(Error::data(format!("SOC state {s} out of range")));
        }
        if let Some(k) = k {
            if k.index() >= self.n_clusters {
                return Err(Error::data(format!("cluster {k} out of range")));
            }
        }
        Ok(())
    }

    pub fn lookup_after_journey(&self, d: DayType, t: usize, k: Cluster, s: usize) -> Result<f64> {
        self.check(t, Some(k), s)?;
        Ok(self.after_journey[self.after_index(d.index(), t, k.index(), s)])
    }

    pub fn lookup_independent(&self, d: DayType, t: usize, s: usize) -> Result<f64> {
        self.check(t, None, s)?;
        Ok(self.independent[self.independent_index(d.index(), t, s)])
    }

    pub fn set_after_journey(&mut self, d: DayType, t: usize, k: Cluster, s: usize, p: f64) {
        let i = self.after_index(d.index(), t, k.index(), s);
        self.after_journey[i] = p;
    }

    pub fn set_independent(&mut self, d: DayType, t: usize, s: usize, p: f64) {
        let i = self.independent_index(d.index(), t, s);
        self.independent[i] = p;
    }

    pub fn validate(&self) -> Result<()> {
        let aj = DAY_TYPES * SLOTS_PER_DAY * self.n_clusters * SOC_STATES;
        let ind = DAY_TYPES * SLOTS_PER_DAY * SOC_STATES;
        if self.day_types != DAY_TYPES
            || self.slots != SLOTS_PER_DAY
            || self.soc_states != SOC_STATES
            || self.n_clusters == 0
        {
            return Err(Error::data("posterior tables: unexpected dimensions"));
        }
        if self.after_journey.len() != aj
            || self.after_opportunities.len() != aj
            || self.after_charges.len() != aj
            || self.independent.len() != ind
            || self.independent_opportunities.len() != ind
            || self.independent_charges.len() != ind
        {
            return Err(Error::data("posterior tables: array lengths do not match dimensions"));
        }
        if self
            .after_journey
            .iter()
            .chain(&self.independent)
            .any(|p| !(0.0..=1.0).contains(p))
        {
            return Err(Error::data("posterior tables: probability outside [0, 1]"));
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("tables serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let t: Self = serde_json::from_str(text)?;
        t.validate()?;
        Ok(t)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Read {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }

    /// Long-format after-journey heatmap, `d,t,k,s,probability`, with `d` as
    /// 0/1 and `k` one-based.
    pub fn write_after_journey_heatmap<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["d", "t", "k", "s", "probability"])?;
        for d in 0..DAY_TYPES {
            for t in 0..SLOTS_PER_DAY {
                for k in 0..self.n_clusters {
                    for s in 0..SOC_STATES {
                        let p = self.after_journey[self.after_index(d, t, k, s)];
                        w.write_record([
                            d.to_string(),
                            t.to_string(),
                            (k + 1).to_string(),
                            s.to_string(),
                            p.to_string(),
                        ])?;
                    }
                }
            }
        }
        w.flush()?;
        Ok(())
    }

    /// Same layout as the after-journey heatmap with an empty `k` column.
    pub fn write_independent_heatmap<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["d", "t", "k", "s", "probability"])?;
        for d in 0..DAY_TYPES {
            for t in 0..SLOTS_PER_DAY {
                for s in 0..SOC_STATES {
                    let p = self.independent[self.independent_index(d, t, s)];
                    w.write_record([
                        d.to_string(),
                        t.to_string(),
                        String::new(),
                        s.to_string(),
                        p.to_string(),
                    ])?;
                }
            }
        }
        w.flush()?;
        Ok(())
    }
}

impl ChargeDecider for PosteriorTables {
    fn after_journey(
        &self,
        day_type: DayType,
        slot: usize,
        cluster: Option<Cluster>,
        soc_state: usize,
        _is_final: bool,
    ) -> f64 {
        match cluster {
            Some(k) if k.index() < self.n_clusters => {
                self.after_journey[self.after_index(day_type.index(), slot, k.index(), soc_state)]
            }
            _ => 0.0,
        }
    }

    fn independent(&self, day_type: DayType, slot: usize, soc_state: usize) -> f64 {
        self.independent[self.independent_index(day_type.index(), slot, soc_state)]
    }
}
