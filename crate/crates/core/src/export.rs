//! CSV and JSON export formats used by the CLI.
//!
//! Complex numbers are always serialized as adjacent `re,im` fields (CSV)
//! or two-element `[re, im]` arrays (JSON); float text uses the shortest
//! round-trip form, so identical bits give identical bytes.

use num_complex::Complex64;
use serde_json::{json, Value};

use crate::expansion::{CoeffTensor, SweepRow};
use crate::kaczmarz::AuxMatrix;
use crate::measure::MomentTable;
use crate::transforms::PowerSeriesGrid;

fn fmt(x: f64) -> String {
    // Normalize the zero sign so algebraically equal results can't differ
    // in text form.
    if x == 0.0 {
        "0".to_string()
    } else {
        format!("{x}")
    }
}

fn complex_json(c: Complex64) -> Value {
    json!([c.re, c.im])
}

/// Moment table rows `n, re, im, bound` for `n = -n_max ..= n_max`.
pub fn moments_to_csv(table: &MomentTable) -> String {
    let mut out = String::from("n,re,im,bound\n");
    let n_max = table.n_max() as i64;
    for n in -n_max..=n_max {
        let v = table.get(n).expect("in range");
        let b = table.bound(n).expect("in range");
        out.push_str(&format!("{n},{},{},{}\n", fmt(v.re), fmt(v.im), fmt(b)));
    }
    out
}

/// Moments over the full box `{-n_max..n_max}^dim` of a measure of any
/// dimension, one row per frequency vector.
pub fn moment_box_to_csv(
    m: &crate::measure::Measure,
    n_max: i64,
    eps: f64,
) -> crate::error::Result<String> {
    let d = m.dim();
    let mut header: Vec<String> = (1..=d).map(|i| format!("n{i}")).collect();
    header.extend(["re", "im", "bound"].iter().map(|s| s.to_string()));
    let mut out = header.join(",");
    out.push('\n');
    let mut xi = vec![-n_max; d];
    loop {
        let (v, b) = m.moment_int(&xi, eps)?;
        let mut fields: Vec<String> = xi.iter().map(|n| n.to_string()).collect();
        fields.push(fmt(v.re));
        fields.push(fmt(v.im));
        fields.push(fmt(b));
        out.push_str(&fields.join(","));
        out.push('\n');
        let mut pos = d;
        loop {
            if pos == 0 {
                return Ok(out);
            }
            pos -= 1;
            xi[pos] += 1;
            if xi[pos] <= n_max {
                break;
            }
            xi[pos] = -n_max;
        }
    }
}

/// Full square matrix, row-major, each entry as an `re,im` field pair.
pub fn aux_to_csv(aux: &AuxMatrix) -> String {
    let n = aux.order();
    let mut out = String::new();
    for row in 0..n {
        let mut fields = Vec::with_capacity(2 * n);
        for col in 0..n {
            let v = aux.entry(row, col);
            fields.push(fmt(v.re));
            fields.push(fmt(v.im));
        }
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

/// Nested-array JSON form of the dual matrix.
pub fn aux_to_json(aux: &AuxMatrix) -> Value {
    let rows: Vec<Value> = (0..aux.order())
        .map(|r| {
            Value::Array(
                (0..aux.order())
                    .map(|c| complex_json(aux.entry(r, c)))
                    .collect(),
            )
        })
        .collect();
    json!({
        "order": aux.order(),
        "source": aux.source(),
        "rows": rows,
    })
}

fn tensor_nest(c: &CoeffTensor, prefix: &mut Vec<usize>) -> Value {
    let depth = prefix.len();
    if depth == c.dim() {
        let v = c.get(prefix);
        return complex_json(v);
    }
    let mut items = Vec::with_capacity(c.orders()[depth] + 1);
    for n in 0..=c.orders()[depth] {
        prefix.push(n);
        items.push(tensor_nest(c, prefix));
        prefix.pop();
    }
    Value::Array(items)
}

/// Tensor as nested JSON arrays with quadrature metadata.
pub fn tensor_to_json(c: &CoeffTensor) -> Value {
    json!({
        "orders": c.orders(),
        "quadrature": serde_json::to_value(c.meta()).expect("meta serializes"),
        "energy": c.energy(),
        "coefficients": tensor_nest(c, &mut Vec::new()),
    })
}

/// Flat CSV with one index column per coordinate.
pub fn tensor_to_csv(c: &CoeffTensor) -> String {
    let mut header: Vec<String> = (1..=c.dim()).map(|i| format!("n{i}")).collect();
    header.push("re".into());
    header.push("im".into());
    let mut out = header.join(",");
    out.push('\n');
    for (flat, v) in c.data().iter().enumerate() {
        let idx = c.unflatten(flat);
        let mut fields: Vec<String> = idx.iter().map(|n| n.to_string()).collect();
        fields.push(fmt(v.re));
        fields.push(fmt(v.im));
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

/// Sweep table rows `N1..Nd, error, error_sq, error_sq_se, defect, defect_se`.
pub fn sweep_to_csv(rows: &[SweepRow]) -> String {
    let dim = rows.first().map(|r| r.orders.len()).unwrap_or(0);
    let mut header: Vec<String> = (1..=dim).map(|i| format!("N{i}")).collect();
    header.extend(
        ["error", "error_sq", "error_sq_se", "defect", "defect_se"]
            .iter()
            .map(|s| s.to_string()),
    );
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        let mut fields: Vec<String> = row.orders.iter().map(|n| n.to_string()).collect();
        fields.push(fmt(row.error));
        fields.push(fmt(row.error_sq));
        fields.push(fmt(row.error_sq_se));
        fields.push(fmt(row.defect));
        fields.push(fmt(row.defect_se));
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

/// Evaluate a series on the polar product grid and emit
/// `re(z_1), im(z_1), .., re(value), im(value)` rows.
///
/// Radii are `r_max (t+1)/R` for `t < R`; angles are `s/T` turns.
pub fn grid_to_csv(
    series: &PowerSeriesGrid,
    radii: usize,
    angles: usize,
    r_max: f64,
) -> crate::error::Result<String> {
    let d = series.dim();
    let mut header = Vec::new();
    for i in 1..=d {
        header.push(format!("re_z{i}"));
        header.push(format!("im_z{i}"));
    }
    header.push("re".into());
    header.push("im".into());
    let mut out = header.join(",");
    out.push('\n');

    let points_per_axis: Vec<Complex64> = (0..radii)
        .flat_map(|t| {
            let r = r_max * (t + 1) as f64 / radii as f64;
            (0..angles).map(move |s| {
                Complex64::from_polar(r, std::f64::consts::TAU * s as f64 / angles as f64)
            })
        })
        .collect();

    let mut idx = vec![0usize; d];
    loop {
        let z: Vec<Complex64> = idx.iter().map(|&i| points_per_axis[i]).collect();
        let v = series.eval(&z)?;
        let mut fields = Vec::with_capacity(2 * d + 2);
        for zi in &z {
            fields.push(fmt(zi.re));
            fields.push(fmt(zi.im));
        }
        fields.push(fmt(v.re));
        fields.push(fmt(v.im));
        out.push_str(&fields.join(","));
        out.push('\n');

        // advance the mixed-radix counter, last coordinate fastest
        let mut pos = d;
        loop {
            if pos == 0 {
                return Ok(out);
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < points_per_axis.len() {
                break;
            }
            idx[pos] = 0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canonical::cantor;
    use crate::expansion::{analyze, QuadratureSpec};
    use crate::kaczmarz::{aux_matrix, MOMENT_EPS};
    use crate::measure::Measure;
    use crate::trig::TrigPoly;

    #[test]
    fn csv_shapes_are_consistent() {
        let m = Measure::Digit(cantor());
        let table = MomentTable::build(&m, 4, MOMENT_EPS).unwrap();
        let aux = aux_matrix(&table, 4).unwrap();
        let csv = aux_to_csv(&aux);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 5);
        assert_eq!(lines[0].split(',').count(), 10);

        let moments_csv = moments_to_csv(&table);
        assert_eq!(moments_csv.lines().count(), 10); // header + 9 rows
    }

    #[test]
    fn tensor_json_nests_by_order() {
        let m = Measure::Digit(crate::canonical::cantor2_ifs());
        let t = analyze(
            &m,
            &TrigPoly::one(2),
            &[1, 2],
            &QuadratureSpec::PrefixExact { depth: 6 },
        )
        .unwrap();
        let v = tensor_to_json(&t);
        let rows = v["coefficients"].as_array().unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].as_array().unwrap().len(), 3);
        let c00 = rows[0].as_array().unwrap()[0].as_array().unwrap();
        assert!((c00[0].as_f64().unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn zero_sign_is_normalized() {
        assert_eq!(fmt(-0.0), "0");
        assert_eq!(fmt(0.0), "0");
    }

    #[test]
    fn flat_csv_indexes_every_entry() {
        let m = Measure::Digit(crate::canonical::cantor2_ifs());
        let t = analyze(
            &m,
            &TrigPoly::one(2),
            &[1, 1],
            &QuadratureSpec::PrefixExact { depth: 6 },
        )
        .unwrap();
        let csv = tensor_to_csv(&t);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "n1,n2,re,im");
        assert_eq!(lines.len(), 5);
        assert!(lines[1].starts_with("0,0,"));
        assert!(lines[4].starts_with("1,1,"));
    }

    #[test]
    fn moment_box_covers_the_grid() {
        let m = Measure::Digit(crate::canonical::lebesgue2_ifs());
        let csv = moment_box_to_csv(&m, 1, 1e-12).unwrap();
        assert_eq!(csv.lines().count(), 10); // header + 3^2 rows
    }
}
