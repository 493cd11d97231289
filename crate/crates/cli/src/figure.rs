use std::fs;
use std::path::Path;

use serde::Serialize;

use coint_alasso::montecarlo::ecdf_ks;

use crate::error::{CliError, Result};
use crate::io::{read_json, write_json, OutputDir};
use crate::summary::{CellSummary, DistSummary};
use crate::svg::{Atom, Curve, Plot};

pub struct FigureArgs<'a> {
    pub input: &'a Path,
    pub out: &'a Path,
    pub t: Option<usize>,
    pub rule: Option<&'a str>,
    pub coord: usize,
    pub xlim: (f64, f64),
}

#[derive(Debug, Serialize)]
struct Sidecar {
    t: usize,
    rule: String,
    coord: usize,
    atom_prob: f64,
    atom_location: f64,
    atom_clipped: bool,
    /// KS distance between the full scaled AL and OLS errors, recomputed from the records.
    ks_al_ols: f64,
    curves: Vec<String>,
}

pub fn run(args: &FigureArgs) -> Result<()> {
    let summaries_path = args.input.join("summaries.json");
    if !summaries_path.exists() {
        return Err(CliError::MissingInput(summaries_path.display().to_string()));
    }
    let (cells, _): (Vec<CellSummary>, _) = read_json(&summaries_path)?;
    let chosen: Vec<&CellSummary> = cells
        .iter()
        .filter(|c| args.t.is_none_or(|t| c.t == t) && args.rule.is_none_or(|r| c.rule == r))
        .collect();
    if chosen.is_empty() {
        return Err(CliError::MissingInput(format!(
            "no cell in {} matches the selection",
            summaries_path.display()
        )));
    }
    if args.xlim.0.partial_cmp(&args.xlim.1) != Some(std::cmp::Ordering::Less) {
        return Err(CliError::Config(format!("empty x range {:?}", args.xlim)));
    }
    let mut dir = OutputDir::create(args.out)?;
    for cell in chosen {
        let coord = cell
            .coords
            .iter()
            .find(|c| c.coord == args.coord)
            .ok_or_else(|| CliError::Config(format!("cell has no coordinate {}", args.coord)))?;
        let (al, ols) = read_scaled_errors(&args.input.join(&cell.records_file), args.coord)?;
        let ks = ecdf_ks(&al, &ols);

        let mut curves = Vec::new();
        let mut push = |id: &'static str, label: &'static str, color: &'static str, dash, d: Option<&DistSummary>| {
            if let Some(k) = d.and_then(|d| d.kde.as_ref()) {
                curves.push((id, label, color, dash, k.points.clone(), k.density.clone()));
            }
        };
        push("al", "AL", "black", None, Some(&coord.al));
        push("ols", "OLS", "steelblue", Some("5 3"), Some(&coord.ols));
        push("limit", "limit", "firebrick", Some("2 2"), coord.limit.as_ref());

        let atom = (coord.al.atom_prob > 0.0).then_some(Atom {
            location: coord.al.atom_location,
            height: coord.al.atom_prob,
        });
        let plot = Plot {
            title: format!("T = {}, lambda = {}", cell.t, cell.rule),
            xlim: args.xlim,
            atom,
            curves: curves
                .iter()
                .map(|(id, label, color, dash, x, y)| Curve {
                    id,
                    label,
                    color,
                    dash: *dash,
                    x,
                    y,
                })
                .collect(),
        };
        let stem = format!("figure_T{}_lam{}", cell.t, cell.rule);
        let svg_path = dir.path(&format!("{stem}.svg"));
        fs::write(&svg_path, plot.render()).map_err(|e| CliError::io(&svg_path, e))?;
        let sidecar = Sidecar {
            t: cell.t,
            rule: cell.rule.clone(),
            coord: args.coord,
            atom_prob: coord.al.atom_prob,
            atom_location: coord.al.atom_location,
            atom_clipped: plot.atom_clipped(),
            ks_al_ols: ks,
            curves: curves.iter().map(|c| c.0.to_string()).collect(),
        };
        write_json(&dir.path(&format!("{stem}.json")), &sidecar)?;
    }
    let echo = serde_json::json!({
        "input": args.input.display().to_string(),
        "t": args.t,
        "rule": args.rule,
        "coord": args.coord,
        "xlim": [args.xlim.0, args.xlim.1],
    });
    dir.finish("figure", echo, None)
}

fn read_scaled_errors(path: &Path, coord: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut r = csv::Reader::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => CliError::io(path, io),
        other => CliError::Failed(format!("{other:?}")),
    })?;
    let headers = r.headers()?.clone();
    let col = |name: String| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::Config(format!("{}: no column {name}", path.display())))
    };
    let ia = col(format!("scaled_error_al{coord}"))?;
    let io = col(format!("scaled_error_ols{coord}"))?;
    let parse = |s: &str| {
        s.parse::<f64>()
            .map_err(|_| CliError::Config(format!("{}: bad number {s:?}", path.display())))
    };
    let (mut al, mut ols) = (Vec::new(), Vec::new());
    for rec in r.records() {
        let rec = rec?;
        al.push(parse(&rec[ia])?);
        ols.push(parse(&rec[io])?);
    }
    Ok((al, ols))
}
