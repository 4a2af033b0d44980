use std::io::{BufRead, BufReader, Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::{transform_cell, BootstrapCell, ScaleTuple};

/// All cells of one analysis, in plan order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapTable {
    pub cells: Vec<BootstrapCell>,
    pub master_seed: Option<u64>,
    pub model: String,
    pub observation: Vec<f64>,
}

/// Column order of the interchange CSV.
pub const TABLE_HEADER: [&str; 9] = [
    "k", "tau1", "tau2", "tau3", "B", "count", "alpha", "z", "var_z",
];

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl BootstrapTable {
    pub fn cells_with_steps(&self, k: usize) -> impl Iterator<Item = &BootstrapCell> {
        self.cells.iter().filter(move |c| c.k() == k)
    }

    /// Writes the table as CSV. Metadata goes into leading `#` comment lines;
    /// floats use shortest round-trip formatting so re-import is exact.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "# model={}", self.model)?;
        if let Some(seed) = self.master_seed {
            writeln!(out, "# seed={seed}")?;
        }
        let obs: Vec<String> = self.observation.iter().map(|x| x.to_string()).collect();
        writeln!(out, "# observation={}", obs.join(" "))?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record(TABLE_HEADER)?;
        for c in &self.cells {
            let t = c.scales.taus();
            w.write_record([
                c.k().to_string(),
                t[0].to_string(),
                opt(t.get(1)),
                opt(t.get(2)),
                c.b.to_string(),
                opt(c.count),
                c.alpha.to_string(),
                c.z.to_string(),
                c.var_z.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads a table in the [`TABLE_HEADER`] schema.
    ///
    /// Rows only need `k, tau…, B, count`; missing `alpha`, `z` or `var_z`
    /// are derived from the count. Rows with an `alpha` but no count are
    /// treated as exact probabilities with nominal `B`.
    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut text = String::new();
        BufReader::new(input).read_to_string(&mut text)?;
        let mut model = String::from("imported");
        let mut master_seed = None;
        let mut observation = Vec::new();
        for line in text.as_bytes().lines() {
            let line = line?;
            let Some(meta) = line.trim().strip_prefix('#') else {
                continue;
            };
            let Some((key, value)) = meta.trim().split_once('=') else {
                continue;
            };
            match key.trim() {
                "model" => model = value.trim().to_string(),
                "seed" => {
                    master_seed = Some(
                        value
                            .trim()
                            .parse()
                            .map_err(|_| Error::Parse(format!("bad seed comment `{value}`")))?,
                    )
                }
                "observation" => {
                    observation = value
                        .split_whitespace()
                        .map(|v| v.parse::<f64>())
                        .collect::<std::result::Result<_, _>>()
                        .map_err(|_| Error::Parse(format!("bad observation comment `{value}`")))?
                }
                _ => {}
            }
        }

        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let headers = rdr.headers()?.clone();
        let col = |name: &str| headers.iter().position(|h| h == name);
        let need = |name: &str| {
            col(name).ok_or_else(|| Error::Parse(format!("count table lacks column `{name}`")))
        };
        let (ik, ib) = (need("k")?, need("B")?);
        let itau = [
            need("tau1")?,
            col("tau2").unwrap_or(usize::MAX),
            col("tau3").unwrap_or(usize::MAX),
        ];
        let (icount, ialpha, iz, ivar) = (col("count"), col("alpha"), col("z"), col("var_z"));

        let mut cells = Vec::new();
        for (row, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let field = |i: Option<usize>| -> Option<&str> {
                i.and_then(|i| rec.get(i)).filter(|s| !s.is_empty())
            };
            let num = |i: Option<usize>, name: &str| -> Result<Option<f64>> {
                field(i)
                    .map(|s| {
                        s.parse::<f64>().map_err(|_| {
                            Error::Parse(format!(
                                "row {}: column `{name}` = `{s}` is not a number",
                                row + 1
                            ))
                        })
                    })
                    .transpose()
            };
            let k: usize = field(Some(ik))
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| Error::Parse(format!("row {}: bad `k`", row + 1)))?;
            if !(1..=3).contains(&k) {
                return Err(Error::Parse(format!(
                    "row {}: k must be 1, 2 or 3",
                    row + 1
                )));
            }
            let mut taus = Vec::with_capacity(k);
            for (j, &i) in itau.iter().take(k).enumerate() {
                let i = (i != usize::MAX).then_some(i);
                let t = num(i, "tau")?.ok_or_else(|| {
                    Error::Parse(format!("row {}: tau{} missing", row + 1, j + 1))
                })?;
                taus.push(t);
            }
            let scales = ScaleTuple::new(&taus)?;
            let b: usize = field(Some(ib))
                .and_then(|s| s.parse().ok())
                .filter(|&b| b > 0)
                .ok_or_else(|| Error::Parse(format!("row {}: bad `B`", row + 1)))?;
            let count = match field(icount) {
                Some(s) => Some(
                    s.parse::<u64>()
                        .map_err(|_| Error::Parse(format!("row {}: bad count `{s}`", row + 1)))?,
                ),
                None => None,
            };
            if count.is_some_and(|c| c > b as u64) {
                return Err(Error::Parse(format!("row {}: count exceeds B", row + 1)));
            }
            let (alpha, z, var_z) = (num(ialpha, "alpha")?, num(iz, "z")?, num(ivar, "var_z")?);
            let cell = match (count, alpha, z, var_z) {
                (c, Some(alpha), Some(z), Some(var_z)) => BootstrapCell {
                    scales,
                    b,
                    count: c,
                    alpha,
                    z,
                    var_z,
                },
                (Some(c), _, _, _) => {
                    let (alpha, z, var_z) = transform_cell(c, b)?;
                    BootstrapCell {
                        scales,
                        b,
                        count: Some(c),
                        alpha,
                        z,
                        var_z,
                    }
                }
                (None, Some(alpha), _, _) => BootstrapCell::from_probability(scales, alpha, b)?,
                (None, None, _, _) => {
                    return Err(Error::Parse(format!(
                        "row {}: neither count nor alpha given",
                        row + 1
                    )))
                }
            };
            cells.push(cell);
        }
        if cells.is_empty() {
            return Err(Error::Parse("count table has no rows".into()));
        }
        if cells.windows(2).any(|w| w[0].k() > w[1].k()) {
            cells.sort_by_key(|c| c.k());
        }
        Ok(Self {
            cells,
            master_seed,
            model,
            observation,
        })
    }
}
