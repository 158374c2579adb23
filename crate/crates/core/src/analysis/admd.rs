use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{DayType, VehicleDay};
use crate::par;
use crate::seed;
use crate::simulator::{monte_carlo_resampled, LoadDistribution, SimConfig, SimModel};
use crate::time::SLOTS_PER_DAY;

const FLAT_CSV: &str = include_str!("../../data/baseline_flat.csv");
const E7_CSV: &str = include_str!("../../data/baseline_e7.csv");

pub const ADMD_HEADER: [&str; 5] = ["rank", "region", "baseline_admd_kw", "combined_admd_kw", "percent_increase"];

/// Mean household demand per slot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineProfile {
    #[serde(with = "crate::time::slot_array")]
    pub kw: [f64; SLOTS_PER_DAY],
    pub day_type: DayType,
    pub season: String,
}

impl BaselineProfile {
    pub fn new(kw: [f64; SLOTS_PER_DAY], day_type: DayType, season: impl Into<String>) -> Result<Self> {
        if kw.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
            return Err(Error::data("baseline demand must be finite and non-negative"));
        }
        Ok(Self {
            kw,
            day_type,
            season: season.into(),
        })
    }

    /// Energy of one day, kWh.
    pub fn day_kwh(&self) -> f64 {
        self.kw.iter().sum::<f64>() * 0.5
    }

    pub fn peak_kw(&self) -> f64 {
        self.kw.iter().copied().fold(0.0, f64::max)
    }

    /// Parses `# day_type=... season=...` followed by a `slot,kw` table.
    pub fn read<R: Read>(input: R) -> Result<Self> {
        let mut reader = BufReader::new(input);
        let mut first = String::new();
        reader.read_line(&mut first)?;
        let tags = first
            .trim()
            .strip_prefix('#')
            .ok_or_else(|| Error::data("baseline file must start with a `# day_type=... season=...` line"))?;
        let mut day_type = None;
        let mut season = None;
        for kv in tags.split_whitespace() {
            match kv.split_once('=') {
                Some(("day_type", v)) => day_type = Some(v.parse::<DayType>().map_err(Error::Data)?),
                Some(("season", v)) => season = Some(v.to_string()),
                _ => {}
            }
        }
        let (Some(day_type), Some(season)) = (day_type, season) else {
            return Err(Error::data("baseline header must name day_type and season"));
        };
        let mut r = csv::Reader::from_reader(reader);
        if r.headers()?.iter().ne(["slot", "kw"]) {
            return Err(Error::data("baseline table must have header `slot,kw`"));
        }
        let mut kw = [f64::NAN; SLOTS_PER_DAY];
        let mut seen = 0;
        for rec in r.deserialize::<(usize, f64)>() {
            let (slot, v) = rec?;
            if slot >= SLOTS_PER_DAY || !kw[slot].is_nan() {
                return Err(Error::data(format!("baseline slot {slot} is out of range or repeated")));
            }
            kw[slot] = v;
            seen += 1;
        }
        if seen != SLOTS_PER_DAY {
            return Err(Error::data("baseline must list all 48 slots"));
        }
        Self::new(kw, day_type, season)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let f = std::fs::File::open(path).map_err(|source| Error::Read {
            path: path.to_path_buf(),
            source,
        })?;
        Self::read(f)
    }

    pub fn write<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "# day_type={} season={}", self.day_type, self.season)?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["slot", "kw"])?;
        for (t, v) in self.kw.iter().enumerate() {
            w.write_record([t.to_string(), v.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Bundled example of a flat-rate household (weekday, winter).
    pub fn bundled_flat() -> Self {
        Self::read(FLAT_CSV.as_bytes()).expect("bundled profile parses")
    }

    /// Bundled example of an economy7 household (weekday, winter).
    pub fn bundled_e7() -> Self {
        Self::read(E7_CSV.as_bytes()).expect("bundled profile parses")
    }
}

/// Mixes flat-rate and economy7 demand by `e7_share` and rescales the result
/// so that a year of such days uses `annual_kwh`.
pub fn blend_baseline(
    flat: &BaselineProfile,
    e7: &BaselineProfile,
    e7_share: f64,
    annual_kwh: f64,
) -> Result<BaselineProfile> {
    if !(0.0..=1.0).contains(&e7_share) {
        return Err(Error::config("e7_share must lie in [0, 1]"));
    }
    if !(annual_kwh > 0.0) {
        return Err(Error::config("annual_kwh must be positive"));
    }
    if flat.day_type != e7.day_type || flat.season != e7.season {
        return Err(Error::data("baseline profiles have different day_type/season tags"));
    }
    let mut kw = [0.0; SLOTS_PER_DAY];
    for t in 0..SLOTS_PER_DAY {
        kw[t] = (1.0 - e7_share) * flat.kw[t] + e7_share * e7.kw[t];
    }
    let mixed = BaselineProfile::new(kw, flat.day_type, flat.season.clone())?;
    let day = mixed.day_kwh();
    if day <= 0.0 {
        return Err(Error::data("blended baseline has no energy to scale"));
    }
    let scale = annual_kwh / (day * 365.0);
    let mut kw = mixed.kw;
    for v in &mut kw {
        *v *= scale;
    }
    BaselineProfile::new(kw, flat.day_type, flat.season.clone())
}

/// Which EV statistic is superimposed on the baseline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdmdBasis {
    Mean,
    P95,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdmdReport {
    pub region: String,
    pub baseline_admd_kw: f64,
    pub combined_admd_kw: f64,
    pub percent_increase: f64,
}

/// Percentage change in after-diversity maximum demand when the mean EV
/// load of `n_households` is added to the per-household baseline.
pub fn admd_increase(baseline: &BaselineProfile, ev: &LoadDistribution, n_households: usize) -> Result<AdmdReport> {
    admd_increase_with(baseline, ev, n_households, AdmdBasis::Mean)
}

pub fn admd_increase_with(
    baseline: &BaselineProfile,
    ev: &LoadDistribution,
    n_households: usize,
    basis: AdmdBasis,
) -> Result<AdmdReport> {
    if n_households == 0 {
        return Err(Error::config("n_households must be positive"));
    }
    match ev.day_type {
        Some(dt) if dt == baseline.day_type => {}
        Some(dt) => {
            return Err(Error::data(format!(
                "EV load is for {dt} days but the baseline is for {} days",
                baseline.day_type
            )))
        }
        None => return Err(Error::data("EV load mixes day types; simulate one day type at a time")),
    }
    let base = baseline.peak_kw();
    if base <= 0.0 {
        return Err(Error::data("baseline demand is zero in every slot"));
    }
    let combined = ev
        .slots
        .iter()
        .map(|s| {
            let ev_kw = match basis {
                AdmdBasis::Mean => s.mean_kw,
                AdmdBasis::P95 => s.p95_kw,
            };
            baseline.kw[s.slot] + ev_kw / n_households as f64
        })
        .fold(base, f64::max);
    Ok(AdmdReport {
        region: String::new(),
        baseline_admd_kw: base,
        combined_admd_kw: combined,
        percent_increase: (combined - base) / base * 100.0,
    })
}

/// One region of a batch.
#[derive(Debug, Clone)]
pub struct Region {
    pub id: String,
    pub pool: Vec<VehicleDay>,
    pub e7_share: f64,
    pub annual_kwh: f64,
    pub n_households: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionFailure {
    pub region: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionalBatch {
    /// Sorted by decreasing percent increase.
    pub reports: Vec<AdmdReport>,
    pub failures: Vec<RegionFailure>,
}

impl RegionalBatch {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(ADMD_HEADER)?;
        for (i, r) in self.reports.iter().enumerate() {
            w.write_record([
                (i + 1).to_string(),
                r.region.clone(),
                r.baseline_admd_kw.to_string(),
                r.combined_admd_kw.to_string(),
                r.percent_increase.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn run_region(
    region: &Region,
    flat: &BaselineProfile,
    e7: &BaselineProfile,
    model: &SimModel,
    cfg: &SimConfig,
) -> Result<AdmdReport> {
    let baseline = blend_baseline(flat, e7, region.e7_share, region.annual_kwh)?;
    let cfg = SimConfig {
        seed: seed::derive_seed(cfg.seed, &format!("region:{}", region.id), &[]),
        ..cfg.clone()
    };
    let ev = monte_carlo_resampled(&region.pool, model, &cfg)?;
    let mut report = admd_increase(&baseline, &ev, region.n_households)?;
    report.region = region.id.clone();
    Ok(report)
}

/// Resampled Monte Carlo and ADMD for every region. A failing region is
/// reported and does not stop the others; each region's stream depends only
/// on the root seed and its id.
pub fn regional_batch(
    regions: &[Region],
    flat: &BaselineProfile,
    e7: &BaselineProfile,
    model: &SimModel,
    cfg: &SimConfig,
) -> RegionalBatch {
    let results = par::map_slice(regions, |r| run_region(r, flat, e7, model, cfg));
    let mut reports = Vec::new();
    let mut failures = Vec::new();
    for (r, res) in regions.iter().zip(results) {
        match res {
            Ok(rep) => reports.push(rep),
            Err(e) => failures.push(RegionFailure {
                region: r.id.clone(),
                message: e.to_string(),
            }),
        }
    }
    reports.sort_by(|a, b| {
        b.percent_increase
            .total_cmp(&a.percent_increase)
            .then_with(|| a.region.cmp(&b.region))
    });
    failures.sort_by(|a, b| a.region.cmp(&b.region));
    RegionalBatch { reports, failures }
}
