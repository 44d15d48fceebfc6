//! Evaluation of a [`ScanConfig`] into CSV or JSON rows.

use serde_json::{Map, Number, Value};

use super::config::{CommandKind, Format, ScanConfig};
use crate::error::Result;
use crate::exec::Execution;
use crate::expansion::{casimir_pressure, energy_laurent_field, reference_coefficients, subtract_outer};
use crate::minkowski::{SeparationVector, T, Z};
use crate::mode_sum::{
    energy_mode_sum_converged, energy_mode_sum_with, CutoffParams, FieldKind, PlateGeometry, ShapeParameter,
};
use crate::real::Real;
use crate::stress::{
    angular_average, circle_average_s2_weight, em_stress, random_covariance_trials, run_covariance_trials,
    scalar_stress, StressDecomposition,
};

/// Relative tail bound the mode sum is carried to when --n-max is absent.
pub const MODE_SUM_TOLERANCE: &str = "1e-10";
/// Largest mode count tried before reporting non-convergence.
pub const MODE_SUM_LIMIT: u64 = 10_000_000;

pub fn columns(command: CommandKind) -> &'static [&'static str] {
    match command {
        CommandKind::EnergySum => &["a", "lambda", "epsilon", "n_max", "energy", "remainder_bound"],
        CommandKind::EnergyExpansion => &["a", "lambda", "c_m4", "c_m2", "c_0", "c_m2_ref", "c_0_ref"],
        CommandKind::Pressure => &["a", "lambda", "field", "finite_part", "divergent_coeff"],
        CommandKind::Stress => &[
            "a",
            "lambda",
            "field",
            "z",
            "A",
            "B_finite",
            "B_div_eps2",
            "Ttt",
            "Tzz",
            "trace_residual",
        ],
        CommandKind::Covariance => &["trial", "rapidity", "angle", "residual"],
        CommandKind::Scan => &[
            "a",
            "lambda",
            "field",
            "c_m2",
            "c_0",
            "finite_part",
            "divergent_coeff",
            "A",
            "energy_finite",
            "stress_energy",
        ],
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Num(Real),
    Int(u64),
    Text(String),
    /// Value unavailable at this point (domain error).
    NaN,
    /// No finite bound exists.
    Infinite,
    /// Column does not apply.
    Empty,
}

#[derive(Clone, Debug, Default)]
pub struct Row {
    pub cells: Vec<Cell>,
    /// Additional named values, emitted in JSON only.
    pub extra: Vec<(&'static str, Cell)>,
}

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub exit_code: i32,
    pub text: String,
    pub diagnostics: Vec<String>,
}

/// Value columns of a row plus its JSON-only extras.
type Values = (Vec<Cell>, Vec<(&'static str, Cell)>);

/// Parameter columns of one grid point plus the evaluation of its values.
struct Point {
    keys: Vec<Cell>,
    values: Result<Values>,
}

fn field_name(f: FieldKind) -> Cell {
    Cell::Text(f.to_string())
}

fn num(x: Real) -> Cell {
    Cell::Num(x)
}

fn cartesian<A: Clone, B: Clone>(xs: &[A], ys: &[B]) -> Vec<(A, B)> {
    xs.iter()
        .flat_map(|x| ys.iter().map(move |y| (x.clone(), y.clone())))
        .collect()
}

pub fn run(cfg: &ScanConfig, exec: Execution) -> RunOutput {
    cfg.apply_precision();
    let a_vals = cfg.a.values();
    let l_vals = cfg.lambda.values();
    let e_vals = cfg.epsilon.values();
    let points = match cfg.command {
        CommandKind::EnergySum => energy_sum(cfg, &a_vals, &l_vals, &e_vals, exec),
        CommandKind::EnergyExpansion => grid_al(&a_vals, &l_vals, exec, |a, l| energy_expansion(cfg, a, l)),
        CommandKind::Pressure => grid_al(&a_vals, &l_vals, exec, |a, l| pressure(cfg, a, l)),
        CommandKind::Stress => stress(cfg, &a_vals, &l_vals, &e_vals, exec),
        CommandKind::Covariance => covariance(cfg, &a_vals[0], &l_vals[0], &e_vals[0], exec),
        CommandKind::Scan => grid_al(&a_vals, &l_vals, exec, |a, l| scan(cfg, a, l)),
    };
    finish(cfg, points)
}

fn grid_al(
    a_vals: &[Real],
    l_vals: &[Real],
    exec: Execution,
    f: impl Fn(&Real, &Real) -> Point + Sync + Send,
) -> Vec<Point> {
    let grid = cartesian(a_vals, l_vals);
    exec.map_slice(&grid, |(a, l)| f(a, l))
}

fn energy_sum(cfg: &ScanConfig, a_vals: &[Real], l_vals: &[Real], e_vals: &[Real], exec: Execution) -> Vec<Point> {
    let grid: Vec<(Real, Real, Real)> = cartesian(&cartesian(a_vals, l_vals), e_vals)
        .into_iter()
        .map(|((a, l), e)| (a, l, e))
        .collect();
    let tol = Real::parse(MODE_SUM_TOLERANCE).expect("literal");
    // rows run one at a time; the mode sum inside each row is the parallel part
    grid.iter()
        .map(|(a, l, e)| {
            let values = (|| {
                let geom = PlateGeometry::new(a.clone())?;
                let cut = CutoffParams::new(e.clone(), ShapeParameter::new(l.clone())?)?;
                let sum = match cfg.n_max {
                    Some(n) => energy_mode_sum_with(&geom, &cut, cfg.field, n, exec)?,
                    None => energy_mode_sum_converged(&geom, &cut, cfg.field, &tol, MODE_SUM_LIMIT, exec)?,
                };
                let bound = sum.remainder_bound.map_or(Cell::Infinite, Cell::Num);
                Ok((vec![Cell::Int(sum.n_max), num(sum.energy), bound], vec![]))
            })();
            Point {
                keys: vec![num(a.clone()), num(l.clone()), num(e.clone())],
                values,
            }
        })
        .collect()
}

fn energy_expansion(cfg: &ScanConfig, a: &Real, l: &Real) -> Point {
    let values = (|| {
        let shape = ShapeParameter::new(l.clone())?;
        PlateGeometry::new(a.clone())?;
        let e = subtract_outer(&energy_laurent_field(a, &shape, cfg.field, cfg.order)?)?;
        let refs = reference_coefficients(a, &shape);
        let k = match cfg.field {
            FieldKind::Electromagnetic => Real::one(),
            FieldKind::Scalar => Real::ratio(1, 2),
        };
        Ok((
            vec![
                num(e.coefficient(-4)?),
                num(e.coefficient(-2)?),
                num(e.coefficient(0)?),
                num(&refs.c_minus2 * &k),
                num(&refs.c_0 * &k),
            ],
            vec![],
        ))
    })();
    Point {
        keys: vec![num(a.clone()), num(l.clone())],
        values,
    }
}

fn pressure(cfg: &ScanConfig, a: &Real, l: &Real) -> Point {
    let values = (|| {
        let shape = ShapeParameter::new(l.clone())?;
        PlateGeometry::new(a.clone())?;
        let p = casimir_pressure(a, &shape, cfg.field)?;
        Ok((vec![num(p.finite_part), num(p.divergent_coeff)], vec![]))
    })();
    Point {
        keys: vec![num(a.clone()), num(l.clone()), field_name(cfg.field)],
        values,
    }
}

fn separations(cfg: &ScanConfig, e_vals: &[Real]) -> Vec<Result<SeparationVector>> {
    match &cfg.eps_vec {
        Some([t, x, y]) => {
            let p = |s: &str| Real::parse(s).expect("validated at parse time");
            vec![SeparationVector::new(p(t), p(x), p(y))]
        }
        None => e_vals
            .iter()
            .map(|e| SeparationVector::new(Real::zero(), e.clone(), Real::zero()))
            .collect(),
    }
}

fn heights(cfg: &ScanConfig, a: &Real) -> Vec<Real> {
    match &cfg.z {
        Some(z) => z.values(),
        None => vec![a / &Real::from_int(2)],
    }
}

fn decomposition_cells(d: &StressDecomposition) -> Values {
    let t = d.assemble();
    (
        vec![
            num(d.a_coeff.clone()),
            num(d.b_finite.clone()),
            num(d.b_divergent_eps2.clone()),
            num(t.get(T, T).clone()),
            num(t.get(Z, Z).clone()),
            num(t.trace().abs()),
        ],
        vec![("circle_average_s2_weight", num(circle_average_s2_weight(d)))],
    )
}

fn stress(cfg: &ScanConfig, a_vals: &[Real], l_vals: &[Real], e_vals: &[Real], exec: Execution) -> Vec<Point> {
    let seps = separations(cfg, e_vals);
    let mut grid = Vec::new();
    for a in a_vals {
        for l in l_vals {
            for sep in &seps {
                match cfg.field {
                    FieldKind::Electromagnetic => grid.push((a.clone(), l.clone(), sep.clone(), None)),
                    FieldKind::Scalar => {
                        for z in heights(cfg, a) {
                            grid.push((a.clone(), l.clone(), sep.clone(), Some(z)));
                        }
                    }
                }
            }
        }
    }
    exec.map_slice(&grid, |(a, l, sep, z)| {
        let values = (|| {
            let geom = PlateGeometry::new(a.clone())?;
            let shape = ShapeParameter::new(l.clone())?;
            let sep = sep.clone()?;
            let d = match z {
                None => em_stress(&geom, &shape, &sep)?,
                Some(z) => scalar_stress(&geom, &shape, &sep, z)?,
            };
            Ok(decomposition_cells(&d))
        })();
        let zc = z.clone().map_or(Cell::Empty, Cell::Num);
        Point {
            keys: vec![num(a.clone()), num(l.clone()), field_name(cfg.field), zc],
            values,
        }
    })
}

fn covariance(cfg: &ScanConfig, a: &Real, l: &Real, length: &Real, exec: Execution) -> Vec<Point> {
    let setup = (|| -> Result<(PlateGeometry, ShapeParameter)> {
        Ok((PlateGeometry::new(a.clone())?, ShapeParameter::new(l.clone())?))
    })();
    let trials = random_covariance_trials(cfg.seed, cfg.trials, cfg.rapidity, length);
    let z = match cfg.field {
        FieldKind::Electromagnetic => None,
        FieldKind::Scalar => heights(cfg, a).into_iter().next(),
    };
    let residuals = match &setup {
        Ok((geom, shape)) => run_covariance_trials(cfg.field, geom, shape, z.as_ref(), &trials, exec),
        Err(e) => vec![Err(e.clone()); trials.len()],
    };
    trials
        .iter()
        .zip(residuals)
        .enumerate()
        .map(|(i, (t, r))| Point {
            keys: vec![Cell::Int(i as u64), num(t.rapidity.clone()), num(t.angle.clone())],
            values: r.map(|r| (vec![num(r)], vec![])),
        })
        .collect()
}

fn scan(cfg: &ScanConfig, a: &Real, l: &Real) -> Point {
    let values = (|| {
        let geom = PlateGeometry::new(a.clone())?;
        let shape = ShapeParameter::new(l.clone())?;
        let e = subtract_outer(&energy_laurent_field(a, &shape, cfg.field, cfg.order)?)?;
        let p = casimir_pressure(a, &shape, cfg.field)?;
        let sep = SeparationVector::new(Real::zero(), a / &Real::from_int(10), Real::zero())?;
        let d = match cfg.field {
            FieldKind::Electromagnetic => em_stress(&geom, &shape, &sep)?,
            FieldKind::Scalar => scalar_stress(&geom, &shape, &sep, &(a / &Real::from_int(2)))?,
        };
        let c0 = e.coefficient(0)?;
        let stress_energy = angular_average(&d).get(T, T) * a;
        Ok((
            vec![
                num(e.coefficient(-2)?),
                num(c0.clone()),
                num(p.finite_part),
                num(p.divergent_coeff),
                num(d.a_coeff),
                num(c0),
                num(stress_energy),
            ],
            vec![],
        ))
    })();
    Point {
        keys: vec![num(a.clone()), num(l.clone()), field_name(cfg.field)],
        values,
    }
}

/// Values below working-precision noise relative to the row's scale are
/// printed as exact zeros.
fn chop(cells: &mut [Cell], precision: usize) {
    let scale = cells
        .iter()
        .filter_map(|c| match c {
            Cell::Num(x) => Some(x.abs()),
            _ => None,
        })
        .fold(Real::zero(), Real::max);
    let floor = scale * Real::from_int(10).powi(-(precision as i32 - 5));
    for c in cells.iter_mut() {
        if let Cell::Num(x) = c {
            if x.abs() <= floor {
                *c = Cell::Num(Real::zero());
            }
        }
    }
}

fn finish(cfg: &ScanConfig, points: Vec<Point>) -> RunOutput {
    let ncols = columns(cfg.command).len();
    let mut exit_code = 0;
    let mut diagnostics = Vec::new();
    let mut rows = Vec::with_capacity(points.len());
    for (i, p) in points.into_iter().enumerate() {
        let mut row = Row {
            cells: p.keys,
            extra: vec![],
        };
        match p.values {
            Ok((mut values, extra)) => {
                if !matches!(cfg.command, CommandKind::EnergySum | CommandKind::Covariance) {
                    chop(&mut values, cfg.precision);
                }
                row.cells.extend(values);
                row.extra = extra;
            }
            Err(e) => {
                let code = if e.is_domain() { 2 } else { 3 };
                exit_code = exit_code.max(code);
                diagnostics.push(format!("row {i}: {e}"));
                row.cells.resize(ncols, Cell::NaN);
            }
        }
        debug_assert_eq!(row.cells.len(), ncols);
        rows.push(row);
    }
    let text = match cfg.format {
        Format::Csv => render_csv(cfg, &rows),
        Format::Json => render_json(cfg, &rows),
    };
    RunOutput {
        exit_code,
        text,
        diagnostics,
    }
}

fn cell_text(c: &Cell, digits: usize) -> String {
    match c {
        Cell::Num(x) => x.to_sci_string(digits),
        Cell::Int(n) => n.to_string(),
        Cell::Text(s) => s.clone(),
        Cell::NaN => "NaN".into(),
        Cell::Infinite => "inf".into(),
        Cell::Empty => String::new(),
    }
}

fn render_csv(cfg: &ScanConfig, rows: &[Row]) -> String {
    let mut out = columns(cfg.command).join(",");
    out.push('\n');
    for row in rows {
        let fields: Vec<String> = row.cells.iter().map(|c| cell_text(c, cfg.precision)).collect();
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

fn cell_json(c: &Cell, digits: usize) -> Value {
    match c {
        Cell::Num(x) => {
            let s = x.to_sci_string(digits);
            s.parse::<Number>().map(Value::Number).unwrap_or(Value::Null)
        }
        Cell::Int(n) => Value::from(*n),
        Cell::Text(s) => Value::from(s.as_str()),
        Cell::NaN | Cell::Infinite | Cell::Empty => Value::Null,
    }
}

fn render_json(cfg: &ScanConfig, rows: &[Row]) -> String {
    let cols = columns(cfg.command);
    let rows: Vec<Value> = rows
        .iter()
        .map(|row| {
            let mut obj = Map::new();
            for (name, c) in cols.iter().zip(&row.cells) {
                obj.insert((*name).to_string(), cell_json(c, cfg.precision));
            }
            for (name, c) in &row.extra {
                obj.insert((*name).to_string(), cell_json(c, cfg.precision));
            }
            Value::Object(obj)
        })
        .collect();
    let mut doc = Map::new();
    doc.insert("command".into(), Value::from(cfg.command.name()));
    doc.insert("precision".into(), Value::from(cfg.precision));
    doc.insert("rows".into(), Value::Array(rows));
    let mut s = serde_json::to_string_pretty(&Value::Object(doc)).expect("JSON values serialize");
    s.push('\n');
    s
}
