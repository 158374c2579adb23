use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use csv::{ReaderBuilder, StringRecord, Trim};

use super::{ChargeEvent, Journey, ParseReport, VehicleDay};
use crate::error::{Error, Result};
use crate::time::MINUTES_PER_DAY;

pub const SURVEY_HEADER: [&str; 5] = [
    "vehicle_id",
    "day_index",
    "start_minute",
    "end_minute",
    "distance_miles",
];

pub const TRIAL_JOURNEYS_HEADER: [&str; 6] = [
    "vehicle_id",
    "day_index",
    "start_minute",
    "end_minute",
    "distance_miles",
    "energy_kwh",
];

pub const CHARGES_HEADER: [&str; 6] = [
    "vehicle_id",
    "day_index",
    "start_minute",
    "end_minute",
    "soc_start",
    "soc_end",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParseConfig {
    /// Emit an empty vehicle-day for every day between a vehicle's first and
    /// last observed day that has no rows of its own.
    pub fill_gaps: bool,
}

impl Default for ParseConfig {
    fn default() -> Self {
        Self { fill_gaps: true }
    }
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|source| Error::Read {
        path: path.to_path_buf(),
        source,
    })
}

pub fn parse_survey(path: &Path, cfg: &ParseConfig) -> Result<(Vec<VehicleDay>, ParseReport)> {
    parse_survey_reader(open(path)?, cfg)
}

pub fn parse_survey_reader<R: Read>(
    reader: R,
    cfg: &ParseConfig,
) -> Result<(Vec<VehicleDay>, ParseReport)> {
    parse_journeys(reader, false, cfg)
}

pub fn parse_trial_journeys_reader<R: Read>(
    reader: R,
    cfg: &ParseConfig,
) -> Result<(Vec<VehicleDay>, ParseReport)> {
    parse_journeys(reader, true, cfg)
}

/// Parses a trial journey file and its charge log.
///
/// Charges for vehicles that never appear in the journey file are kept but
/// produce a warning.
pub fn parse_trial(
    journeys_path: &Path,
    charges_path: &Path,
    cfg: &ParseConfig,
) -> Result<(Vec<VehicleDay>, Vec<ChargeEvent>, ParseReport)> {
    let (days, mut report) = parse_journeys(open(journeys_path)?, true, cfg)?;
    let (charges, charge_report) = parse_charges_reader(open(charges_path)?)?;
    report.merge(charge_report);

    let known: BTreeSet<&str> = days.iter().map(|d| d.vehicle_id.as_str()).collect();
    let mut orphans = BTreeSet::new();
    for c in &charges {
        if !known.contains(c.vehicle_id.as_str()) && orphans.insert(c.vehicle_id.clone()) {
            report.warn(
                0,
                "vehicle_id",
                format!("charges for `{}` have no matching journeys", c.vehicle_id),
            );
        }
    }
    Ok((days, charges, report))
}

pub fn parse_charges(path: &Path) -> Result<(Vec<ChargeEvent>, ParseReport)> {
    parse_charges_reader(open(path)?)
}

/// Reads the header row. `None` means the input was empty.
fn read_header<R: Read>(rdr: &mut csv::Reader<R>, expected: &[&str]) -> Result<Option<()>> {
    let headers = rdr.headers()?.clone();
    if headers.is_empty() || (headers.len() == 1 && headers[0].is_empty()) {
        return Ok(None);
    }
    let got: Vec<&str> = headers.iter().collect();
    if got != expected {
        return Err(Error::data(format!(
            "unexpected header `{}`, expected `{}`",
            got.join(","),
            expected.join(",")
        )));
    }
    Ok(Some(()))
}

fn reader<R: Read>(r: R) -> csv::Reader<R> {
    ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(Trim::All)
        .from_reader(r)
}

fn line_of(rec: &StringRecord) -> u64 {
    rec.position().map(|p| p.line()).unwrap_or(0)
}

fn field<'r>(rec: &'r StringRecord, idx: usize) -> &'r str {
    rec.get(idx).unwrap_or("")
}

fn parse_u32(rec: &StringRecord, idx: usize, name: &str) -> std::result::Result<u32, String> {
    let raw = field(rec, idx);
    raw.parse::<u32>()
        .map_err(|_| format!("`{raw}` is not a non-negative integer for {name}"))
}

fn parse_f64(rec: &StringRecord, idx: usize, name: &str) -> std::result::Result<f64, String> {
    let raw = field(rec, idx);
    match raw.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(format!("`{raw}` is not a number for {name}")),
    }
}

struct RowJourney {
    line: u64,
    journey: Journey,
}

fn parse_journeys<R: Read>(
    input: R,
    with_energy: bool,
    cfg: &ParseConfig,
) -> Result<(Vec<VehicleDay>, ParseReport)> {
    let header: &[&str] = if with_energy {
        &TRIAL_JOURNEYS_HEADER
    } else {
        &SURVEY_HEADER
    };
    let mut rdr = reader(input);
    let mut report = ParseReport::default();
    if read_header(&mut rdr, header)?.is_none() {
        return Ok((Vec::new(), report));
    }

    // vehicle -> day -> journeys
    let mut observed: BTreeMap<String, BTreeMap<u32, Vec<RowJourney>>> = BTreeMap::new();

    for rec in rdr.records() {
        let rec = rec?;
        let line = line_of(&rec);
        if rec.len() != header.len() {
            report.error(
                line,
                "*",
                format!("expected {} fields, found {}", header.len(), rec.len()),
            );
            continue;
        }
        let vehicle_id = field(&rec, 0).to_string();
        if vehicle_id.is_empty() {
            report.error(line, "vehicle_id", "empty vehicle id");
            continue;
        }
        let day_index = match parse_u32(&rec, 1, "day_index") {
            Ok(v) => v,
            Err(m) => {
                report.error(line, "day_index", m);
                continue;
            }
        };

        // A row with no journey fields marks an observed day without use.
        let journey_cols = &rec.iter().collect::<Vec<_>>()[2..];
        if journey_cols.iter().all(|c| c.is_empty()) {
            observed.entry(vehicle_id).or_default().entry(day_index).or_default();
            continue;
        }

        let start = match parse_u32(&rec, 2, "start_minute") {
            Ok(v) if v < MINUTES_PER_DAY => v,
            Ok(v) => {
                report.error(line, "start_minute", format!("{v} is outside [0, 1440)"));
                continue;
            }
            Err(m) => {
                report.error(line, "start_minute", m);
                continue;
            }
        };
        let mut end = match parse_u32(&rec, 3, "end_minute") {
            Ok(v) => v,
            Err(m) => {
                report.error(line, "end_minute", m);
                continue;
            }
        };
        // An end at or before the start wraps past midnight.
        if end <= start {
            end += MINUTES_PER_DAY;
        }
        if end - start > MINUTES_PER_DAY {
            report.error(line, "end_minute", "journey longer than 24 hours");
            continue;
        }
        let distance = match parse_f64(&rec, 4, "distance_miles") {
            Ok(v) if v > 0.0 => v,
            Ok(v) => {
                report.error(line, "distance_miles", format!("{v} is not positive"));
                continue;
            }
            Err(m) => {
                report.error(line, "distance_miles", m);
                continue;
            }
        };
        let energy_used = if with_energy {
            match parse_f64(&rec, 5, "energy_kwh") {
                Ok(v) if v >= 0.0 => Some(v),
                Ok(v) => {
                    report.error(line, "energy_kwh", format!("{v} is negative"));
                    continue;
                }
                Err(m) => {
                    report.error(line, "energy_kwh", m);
                    continue;
                }
            }
        } else {
            None
        };

        let journey = Journey {
            vehicle_id: vehicle_id.clone(),
            day_index,
            start_minute: start,
            end_minute: end,
            distance,
            energy_used,
        };
        let vehicle = observed.entry(vehicle_id).or_default();
        for part in split_at_midnight(journey) {
            vehicle
                .entry(part.day_index)
                .or_default()
                .push(RowJourney {
                    line,
                    journey: part,
                });
        }
    }

    let mut days = Vec::new();
    for (vehicle_id, by_day) in observed {
        let (first, last) = match (by_day.keys().next(), by_day.keys().next_back()) {
            (Some(&f), Some(&l)) => (f, l),
            _ => continue,
        };
        let mut by_day = by_day;
        if cfg.fill_gaps {
            for d in first..=last {
                by_day.entry(d).or_default();
            }
        }
        for (day_index, mut rows) in by_day {
            rows.sort_by_key(|r| (r.journey.start_minute, r.journey.end_minute, r.line));
            let mut journeys: Vec<Journey> = Vec::with_capacity(rows.len());
            for r in rows {
                if let Some(prev) = journeys.last() {
                    if r.journey.start_minute < prev.end_minute {
                        report.error(
                            r.line,
                            "start_minute",
                            format!(
                                "journey overlaps an earlier journey of `{}` on day {}",
                                vehicle_id, day_index
                            ),
                        );
                        continue;
                    }
                }
                journeys.push(r.journey);
            }
            days.push(VehicleDay::new(vehicle_id.clone(), day_index, journeys));
        }
    }
    report.errors.sort_by_key(|e| e.line);
    Ok((days, report))
}

/// Splits a journey whose end lies past midnight into two same-day pieces.
/// Distance and energy are shared in proportion to the time on each side.
pub(crate) fn split_at_midnight(j: Journey) -> Vec<Journey> {
    if j.end_minute <= MINUTES_PER_DAY {
        return vec![j];
    }
    let total = (j.end_minute - j.start_minute) as f64;
    let before = (MINUTES_PER_DAY - j.start_minute) as f64 / total;
    let d1 = j.distance * before;
    let e1 = j.energy_used.map(|e| e * before);
    let first = Journey {
        end_minute: MINUTES_PER_DAY,
        distance: d1,
        energy_used: e1,
        ..j.clone()
    };
    let second = Journey {
        vehicle_id: j.vehicle_id.clone(),
        day_index: j.day_index + 1,
        start_minute: 0,
        end_minute: j.end_minute - MINUTES_PER_DAY,
        distance: j.distance - d1,
        energy_used: j.energy_used.zip(e1).map(|(e, e1)| e - e1),
    };
    vec![first, second]
}

pub fn parse_charges_reader<R: Read>(input: R) -> Result<(Vec<ChargeEvent>, ParseReport)> {
    let mut rdr = reader(input);
    let mut report = ParseReport::default();
    if read_header(&mut rdr, &CHARGES_HEADER)?.is_none() {
        return Ok((Vec::new(), report));
    }
    let mut charges = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = line_of(&rec);
        if rec.len() != CHARGES_HEADER.len() {
            report.error(
                line,
                "*",
                format!("expected {} fields, found {}", CHARGES_HEADER.len(), rec.len()),
            );
            continue;
        }
        match parse_charge_row(&rec) {
            Ok(c) => charges.push(c),
            Err((f, m)) => report.error(line, f, m),
        }
    }
    charges.sort_by(|a, b| {
        (a.vehicle_id.as_str(), a.day_index, a.start_minute).cmp(&(
            b.vehicle_id.as_str(),
            b.day_index,
            b.start_minute,
        ))
    });
    Ok((charges, report))
}

fn parse_charge_row(rec: &StringRecord) -> std::result::Result<ChargeEvent, (&'static str, String)> {
    let vehicle_id = field(rec, 0).to_string();
    if vehicle_id.is_empty() {
        return Err(("vehicle_id", "empty vehicle id".into()));
    }
    let day_index = parse_u32(rec, 1, "day_index").map_err(|m| ("day_index", m))?;
    let start = parse_u32(rec, 2, "start_minute").map_err(|m| ("start_minute", m))?;
    if start >= MINUTES_PER_DAY {
        return Err(("start_minute", format!("{start} is outside [0, 1440)")));
    }
    let mut end = parse_u32(rec, 3, "end_minute").map_err(|m| ("end_minute", m))?;
    if end <= start {
        end += MINUTES_PER_DAY;
    }
    let soc_start = parse_f64(rec, 4, "soc_start").map_err(|m| ("soc_start", m))?;
    let soc_end = parse_f64(rec, 5, "soc_end").map_err(|m| ("soc_end", m))?;
    for (name, v) in [("soc_start", soc_start), ("soc_end", soc_end)] {
        if !(0.0..=1.0).contains(&v) {
            return Err((
                if name == "soc_start" { "soc_start" } else { "soc_end" },
                format!("{v} is outside [0, 1]"),
            ));
        }
    }
    if soc_end < soc_start {
        return Err((
            "soc_end",
            format!("soc_end {soc_end} is below soc_start {soc_start}"),
        ));
    }
    Ok(ChargeEvent {
        vehicle_id,
        day_index,
        start_minute: start,
        end_minute: end,
        soc_start,
        soc_end,
    })
}

fn write_journey_rows<W: Write>(
    out: W,
    days: &[VehicleDay],
    with_energy: bool,
    kwh_per_mile: Option<f64>,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if with_energy {
        w.write_record(TRIAL_JOURNEYS_HEADER)?;
    } else {
        w.write_record(SURVEY_HEADER)?;
    }
    for day in days {
        if day.journeys.is_empty() {
            let mut row = vec![day.vehicle_id.clone(), day.day_index.to_string()];
            row.resize(if with_energy { 6 } else { 5 }, String::new());
            w.write_record(&row)?;
            continue;
        }
        for j in &day.journeys {
            let mut row = vec![
                j.vehicle_id.clone(),
                j.day_index.to_string(),
                j.start_minute.to_string(),
                j.end_minute.to_string(),
                j.distance.to_string(),
            ];
            if with_energy {
                let e = match (j.energy_used, kwh_per_mile) {
                    (Some(e), _) => e,
                    (None, Some(rate)) => j.distance * rate,
                    (None, None) => {
                        return Err(Error::data(format!(
                            "journey of `{}` on day {} has no energy figure",
                            j.vehicle_id, j.day_index
                        )))
                    }
                };
                row.push(e.to_string());
            }
            w.write_record(&row)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Writes days in the survey schema. Unused days become rows with empty
/// journey fields so that they survive a round trip.
pub fn write_survey<W: Write>(out: W, days: &[VehicleDay]) -> Result<()> {
    write_journey_rows(out, days, false, None)
}

/// Writes days in the trial journey schema. Journeys without a measured
/// energy figure use `kwh_per_mile` when given, otherwise the write fails.
pub fn write_trial_journeys<W: Write>(
    out: W,
    days: &[VehicleDay],
    kwh_per_mile: Option<f64>,
) -> Result<()> {
    write_journey_rows(out, days, true, kwh_per_mile)
}

pub fn write_charges<W: Write>(out: W, charges: &[ChargeEvent]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CHARGES_HEADER)?;
    for c in charges {
        w.write_record([
            c.vehicle_id.clone(),
            c.day_index.to_string(),
            c.start_minute.to_string(),
            c.end_minute.to_string(),
            c.soc_start.to_string(),
            c.soc_end.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
