//! CSV schemas for the data directory. Readers skip `#` comment lines so
//! files may carry provenance headers.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use crate::carbon::CarbonParams;
use crate::climate::EbmParams;
use crate::ensemble::prior::{ForcingPrior, CARBON_COLUMNS, EBM_COLUMNS};
use crate::ensemble::{ConstraintTarget, Series};
use crate::error::{Error, Result};
use crate::history::{Drivers, ForcingScales, MemberParams, Metrics, CATEGORIES, METRIC_NAMES, N_CATEGORIES, START_YEAR};
use crate::sim::InitialConditions;
use crate::synthetic::{Emissions, ForcingSeries};

/// A parsed CSV file: header names and raw cells.
#[derive(Debug, Clone)]
pub struct Table {
    pub path: std::path::PathBuf,
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn read(path: &Path) -> Result<Table> {
        if !path.exists() {
            return Err(Error::MissingFile { path: path.to_path_buf() });
        }
        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_path(path)?;
        let headers = rdr.headers()?.iter().map(str::to_string).collect();
        let rows = rdr
            .records()
            .map(|r| r.map(|rec| rec.iter().map(str::to_string).collect()))
            .collect::<std::result::Result<_, _>>()?;
        Ok(Table {
            path: path.to_path_buf(),
            headers,
            rows,
        })
    }

    fn bad(&self, reason: impl Into<String>) -> Error {
        Error::BadData {
            path: self.path.clone(),
            reason: reason.into(),
        }
    }

    pub fn column_index(&self, name: &str) -> Result<usize> {
        self.headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| self.bad(format!("missing column `{name}`")))
    }

    pub fn f64_column(&self, name: &str) -> Result<Vec<f64>> {
        let j = self.column_index(name)?;
        self.rows
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let cell = r.get(j).map(String::as_str).unwrap_or("");
                cell.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| self.bad(format!("row {}: `{name}` = `{cell}` is not a finite number", i + 1)))
            })
            .collect()
    }

    pub fn str_column(&self, name: &str) -> Result<Vec<String>> {
        let j = self.column_index(name)?;
        Ok(self.rows.iter().map(|r| r.get(j).cloned().unwrap_or_default()).collect())
    }

    pub fn id_column(&self, name: &str) -> Result<Vec<usize>> {
        self.str_column(name)?
            .iter()
            .enumerate()
            .map(|(i, c)| {
                c.parse::<usize>()
                    .map_err(|_| self.bad(format!("row {}: `{name}` = `{c}` is not a member id", i + 1)))
            })
            .collect()
    }

    /// Rows as float vectors in the order of `names`.
    pub fn f64_rows(&self, names: &[&str]) -> Result<Vec<Vec<f64>>> {
        let cols: Vec<Vec<f64>> = names.iter().map(|n| self.f64_column(n)).collect::<Result<_>>()?;
        Ok((0..self.rows.len()).map(|i| cols.iter().map(|c| c[i]).collect()).collect())
    }
}

/// Write a header row and rows of cells.
pub fn write_rows<W: Write>(w: W, headers: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(headers)?;
    for r in rows {
        wtr.write_record(&r)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn fmt(v: f64) -> String {
    format!("{v}")
}

fn annual_years(years: &[f64], table: &Table) -> Result<()> {
    if years.first() != Some(&START_YEAR) || years.windows(2).any(|w| w[1] - w[0] != 1.0) {
        return Err(table.bad(format!("years must be annual from {START_YEAR}")));
    }
    Ok(())
}

/// `year,<value_column>` series.
pub fn read_series(path: &Path, value_column: &str) -> Result<Series> {
    let t = Table::read(path)?;
    let years = t.f64_column("year")?;
    let values = t.f64_column(value_column)?;
    if years.is_empty() {
        return Err(t.bad("no rows"));
    }
    if years.windows(2).any(|w| w[1] <= w[0]) {
        return Err(t.bad("years must increase"));
    }
    Ok(Series::new(years, values))
}

pub fn write_series<W: Write>(w: W, value_column: &str, s: &Series) -> Result<()> {
    write_rows(
        w,
        &["year", value_column],
        s.years.iter().zip(&s.values).map(|(y, v)| vec![fmt(*y), fmt(*v)]),
    )
}

pub fn read_targets(path: &Path) -> Result<Vec<ConstraintTarget>> {
    let t = Table::read(path)?;
    let names = t.str_column("name")?;
    let rows = t.f64_rows(&["p5", "p50", "p95"])?;
    let out: Vec<ConstraintTarget> = names
        .into_iter()
        .zip(rows)
        .map(|(name, r)| ConstraintTarget {
            name,
            p5: r[0],
            p50: r[1],
            p95: r[2],
        })
        .collect();
    if let Some(bad) = out.iter().find(|c| !(c.p5 < c.p50 && c.p50 < c.p95)) {
        return Err(t.bad(format!("target {} percentiles must increase", bad.name)));
    }
    Ok(out)
}

pub fn write_targets<W: Write>(w: W, targets: &[ConstraintTarget]) -> Result<()> {
    write_rows(
        w,
        &["name", "p5", "p50", "p95"],
        targets
            .iter()
            .map(|c| vec![c.name.clone(), fmt(c.p5), fmt(c.p50), fmt(c.p95)]),
    )
}

/// `year,co2_ffi,co2_afolu`, annual from 1750.
pub fn read_emissions(path: &Path) -> Result<Emissions> {
    let t = Table::read(path)?;
    let years = t.f64_column("year")?;
    annual_years(&years, &t)?;
    Ok(Emissions {
        years,
        ffi: t.f64_column("co2_ffi")?,
        afolu: t.f64_column("co2_afolu")?,
    })
}

pub fn write_emissions<W: Write>(w: W, e: &Emissions) -> Result<()> {
    write_rows(
        w,
        &["year", "co2_ffi", "co2_afolu"],
        (0..e.years.len()).map(|i| vec![fmt(e.years[i]), fmt(e.ffi[i]), fmt(e.afolu[i])]),
    )
}

/// `year,<category>...`, annual from 1750.
pub fn read_forcing(path: &Path, id: &str) -> Result<ForcingSeries> {
    let t = Table::read(path)?;
    let years = t.f64_column("year")?;
    annual_years(&years, &t)?;
    let rows = t.f64_rows(&CATEGORIES)?;
    Ok(ForcingSeries {
        id: id.to_string(),
        rows: rows
            .into_iter()
            .map(|r| {
                let mut a = [0.0; N_CATEGORIES];
                a.copy_from_slice(&r);
                a
            })
            .collect(),
    })
}

pub fn write_forcing<W: Write>(w: W, f: &ForcingSeries) -> Result<()> {
    let mut headers = vec!["year"];
    headers.extend(CATEGORIES);
    write_rows(
        w,
        &headers,
        f.rows.iter().enumerate().map(|(i, r)| {
            let mut row = vec![fmt(Drivers::year(i))];
            row.extend(r.iter().map(|v| fmt(*v)));
            row
        }),
    )
}

pub fn read_calibration(path: &Path, columns: &[&str]) -> Result<Vec<Vec<f64>>> {
    Table::read(path)?.f64_rows(columns)
}

pub fn write_calibration<W: Write>(w: W, columns: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    write_rows(w, columns, rows.iter().map(|r| r.iter().map(|v| fmt(*v)).collect()))
}

/// `name,descriptor,kind`
pub fn read_forcing_priors(path: &Path) -> Result<Vec<ForcingPrior>> {
    let t = Table::read(path)?;
    let names = t.str_column("name")?;
    let descriptors = t.str_column("descriptor")?;
    let kinds = t.str_column("kind")?;
    names
        .into_iter()
        .zip(descriptors)
        .zip(kinds)
        .map(|((name, d), k)| {
            Ok(ForcingPrior {
                name,
                dist: d.parse().map_err(|e: Error| t.bad(e.to_string()))?,
                kind: k.parse().map_err(|e: Error| t.bad(e.to_string()))?,
            })
        })
        .collect()
}

pub fn write_forcing_priors<W: Write>(w: W, priors: &[ForcingPrior]) -> Result<()> {
    write_rows(
        w,
        &["name", "descriptor", "kind"],
        priors
            .iter()
            .map(|p| vec![p.name.clone(), p.dist.to_string(), p.kind.to_string()]),
    )
}

fn member_headers() -> Vec<String> {
    let mut h = vec!["member_id".to_string()];
    h.extend(EBM_COLUMNS.iter().map(|s| s.to_string()));
    h.extend(CARBON_COLUMNS.iter().map(|s| s.to_string()));
    h.push("c_ref".into());
    h.push("scale_co2".into());
    h.extend(CATEGORIES.iter().map(|c| format!("scale_{c}")));
    h.push("solar_trend".into());
    h
}

/// Member parameter table: id, energy balance, carbon feedbacks, c_ref and
/// forcing scales.
pub fn read_members(path: &Path) -> Result<Vec<MemberParams>> {
    let t = Table::read(path)?;
    let ids = t.id_column("member_id")?;
    let headers = member_headers();
    let names: Vec<&str> = headers[1..].iter().map(String::as_str).collect();
    let rows = t.f64_rows(&names)?;
    let mut seen = std::collections::BTreeSet::new();
    ids.into_iter()
        .zip(rows)
        .map(|(id, r)| {
            if !seen.insert(id) {
                return Err(t.bad(format!("duplicate member_id {id}")));
            }
            let mut nonco2 = [0.0; N_CATEGORIES];
            nonco2.copy_from_slice(&r[15..15 + N_CATEGORIES]);
            let m = MemberParams {
                id,
                ebm: EbmParams {
                    kappa: [r[0], r[1], r[2]],
                    heat_capacity: [r[3], r[4], r[5]],
                    efficacy: r[6],
                    gamma_autocorr: r[7],
                    f2x: r[8],
                    dt: 1.0,
                },
                carbon: CarbonParams {
                    r0: r[9],
                    r_u: r[10],
                    r_t: r[11],
                    r_a: r[12],
                    c_ref: r[13],
                    ..CarbonParams::default()
                },
                scales: ForcingScales {
                    co2: r[14],
                    nonco2,
                    solar_trend: r[15 + N_CATEGORIES],
                },
            };
            m.ebm
                .validate()
                .and_then(|_| m.carbon.validate())
                .map_err(|e| t.bad(format!("member {id}: {e}")))?;
            Ok(m)
        })
        .collect()
}

pub fn write_members<W: Write>(w: W, members: &[MemberParams]) -> Result<()> {
    let headers = member_headers();
    let h: Vec<&str> = headers.iter().map(String::as_str).collect();
    write_rows(
        w,
        &h,
        members.iter().map(|m| {
            let e = &m.ebm;
            let c = &m.carbon;
            let mut row: Vec<f64> = vec![
                e.kappa[0],
                e.kappa[1],
                e.kappa[2],
                e.heat_capacity[0],
                e.heat_capacity[1],
                e.heat_capacity[2],
                e.efficacy,
                e.gamma_autocorr,
                e.f2x,
                c.r0,
                c.r_u,
                c.r_t,
                c.r_a,
                c.c_ref,
                m.scales.co2,
            ];
            row.extend(m.scales.nonco2);
            row.push(m.scales.solar_trend);
            std::iter::once(m.id.to_string()).chain(row.into_iter().map(fmt)).collect()
        }),
    )
}

const INIT_COLUMNS: [&str; 11] = ["R1", "R2", "R3", "R4", "T1", "T2", "T3", "f2x_eff", "c_ref", "G", "member_id"];

/// `member_id,R1..R4,T1..T3,f2x_eff,c_ref,G`
pub fn read_init_conditions(path: &Path) -> Result<BTreeMap<usize, InitialConditions>> {
    let t = Table::read(path)?;
    let ids = t.id_column("member_id")?;
    let rows = t.f64_rows(&INIT_COLUMNS[..10])?;
    let mut out = BTreeMap::new();
    for (id, r) in ids.into_iter().zip(rows) {
        let init = InitialConditions {
            pools: [r[0], r[1], r[2], r[3]],
            temperatures: [r[4], r[5], r[6]],
            f2x_eff: r[7],
            c_ref: r[8],
            cumulative_emissions: r[9],
        };
        if out.insert(id, init).is_some() {
            return Err(t.bad(format!("duplicate member_id {id}")));
        }
    }
    Ok(out)
}

pub fn write_init_conditions<W: Write>(w: W, rows: &[(usize, InitialConditions)]) -> Result<()> {
    let mut headers = vec!["member_id"];
    headers.extend(&INIT_COLUMNS[..10]);
    write_rows(
        w,
        &headers,
        rows.iter().map(|(id, c)| {
            let vals = [
                c.pools[0],
                c.pools[1],
                c.pools[2],
                c.pools[3],
                c.temperatures[0],
                c.temperatures[1],
                c.temperatures[2],
                c.f2x_eff,
                c.c_ref,
                c.cumulative_emissions,
            ];
            std::iter::once(id.to_string()).chain(vals.into_iter().map(fmt)).collect()
        }),
    )
}

/// Per-member exogenous forcing `(years, W m^-2)`.
pub type FextTable = BTreeMap<usize, (Vec<f64>, Vec<f64>)>;

/// `member_id,year,wm2`
pub fn read_fext(path: &Path) -> Result<FextTable> {
    let t = Table::read(path)?;
    let ids = t.id_column("member_id")?;
    let years = t.f64_column("year")?;
    let values = t.f64_column("wm2")?;
    let mut out: FextTable = BTreeMap::new();
    for ((id, y), v) in ids.into_iter().zip(years).zip(values) {
        let e = out.entry(id).or_default();
        if e.0.last().is_some_and(|last| y <= *last) {
            return Err(t.bad(format!("member {id}: years must increase")));
        }
        e.0.push(y);
        e.1.push(v);
    }
    Ok(out)
}

pub fn write_fext<W: Write>(w: W, rows: &[(usize, Vec<f64>, Vec<f64>)]) -> Result<()> {
    write_rows(
        w,
        &["member_id", "year", "wm2"],
        rows.iter().flat_map(|(id, years, values)| {
            years
                .iter()
                .zip(values)
                .map(move |(y, v)| vec![id.to_string(), fmt(*y), fmt(*v)])
        }),
    )
}

/// Constraint metrics of posterior members plus present-day aerosol forcing.
#[derive(Debug, Clone, PartialEq)]
pub struct MemberMetrics {
    pub id: usize,
    pub metrics: Metrics,
    /// Aerosol forcing in 2014, W m^-2.
    pub aerosol_2014: f64,
}

pub fn read_member_metrics(path: &Path) -> Result<BTreeMap<usize, MemberMetrics>> {
    let t = Table::read(path)?;
    let ids = t.id_column("member_id")?;
    let mut names: Vec<&str> = METRIC_NAMES.to_vec();
    names.push("aerosol_2014");
    let rows = t.f64_rows(&names)?;
    Ok(ids
        .into_iter()
        .zip(rows)
        .map(|(id, r)| {
            let metrics = Metrics {
                ecs: r[0],
                tcr: r[1],
                historical_warming: r[2],
                erf_ari: r[3],
                erf_aci: r[4],
                erf_aerosol: r[5],
                co2_2014: r[6],
                ohc_change: r[7],
                ssp245_warming: r[8],
            };
            (
                id,
                MemberMetrics {
                    id,
                    metrics,
                    aerosol_2014: r[9],
                },
            )
        })
        .collect())
}

pub fn write_member_metrics<W: Write>(w: W, rows: &[MemberMetrics]) -> Result<()> {
    let mut headers = vec!["member_id"];
    headers.extend(METRIC_NAMES);
    headers.push("aerosol_2014");
    write_rows(
        w,
        &headers,
        rows.iter().map(|m| {
            std::iter::once(m.id.to_string())
                .chain(m.metrics.to_array().into_iter().map(fmt))
                .chain(std::iter::once(fmt(m.aerosol_2014)))
                .collect()
        }),
    )
}
