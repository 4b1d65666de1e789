use std::io::Write;

use serde::{Deserialize, Serialize};

use super::optimal_order;
use crate::dataset::PatternTable;
use crate::error::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CurveKind {
    Roc,
    Pr,
}

impl CurveKind {
    pub fn headers(self) -> [&'static str; 2] {
        match self {
            CurveKind::Roc => ["fpr", "tpr"],
            CurveKind::Pr => ["recall", "precision"],
        }
    }
}

/// Vertices of an optimal curve and the trapezoidal area beneath them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoints {
    pub kind: CurveKind,
    pub points: Vec<(f64, f64)>,
    pub area: f64,
}

impl CurvePoints {
    fn new(kind: CurveKind, points: Vec<(f64, f64)>) -> Self {
        let area = trapezoid_area(&points);
        CurvePoints { kind, points, area }
    }

    /// True when consecutive segments never turn left by more than `tol` (cross product).
    pub fn is_concave(&self, tol: f64) -> bool {
        self.points.windows(3).all(|w| {
            let (a, b, c) = (w[0], w[1], w[2]);
            let (dx1, dy1) = (b.0 - a.0, b.1 - a.1);
            let (dx2, dy2) = (c.0 - b.0, c.1 - b.1);
            dx1 * dy2 - dy1 * dx2 <= tol
        })
    }

    /// CSV with the kind's two-column header.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(self.kind.headers())?;
        for (x, y) in &self.points {
            w.write_record([x.to_string(), y.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn trapezoid_area(points: &[(f64, f64)]) -> f64 {
    points
        .windows(2)
        .map(|w| (w[1].0 - w[0].0) * (w[0].1 + w[1].1) / 2.0)
        .sum()
}

/// Origin followed by one vertex per pattern in descending positive-fraction order.
pub fn optimal_roc_curve(table: &PatternTable) -> Result<CurvePoints> {
    table.require_both_classes()?;
    let counts = table.counts();
    let (np, nn) = (table.n_plus() as f64, table.n_minus() as f64);
    let mut points = vec![(0.0, 0.0)];
    let (mut tp, mut fp) = (0u64, 0u64);
    for i in optimal_order(&counts) {
        tp += counts[i].pos;
        fp += counts[i].neg;
        points.push((fp as f64 / nn, tp as f64 / np));
    }
    Ok(CurvePoints::new(CurveKind::Roc, points))
}

/// Optimal PR curve at sample resolution.
///
/// Inside a pattern group the expected precision is not linear in recall, so every sample
/// contributes a vertex; the first vertex sits at recall 0 with the leading pattern's
/// positive fraction as precision. The trapezoidal area is the AUC-PR upper bound.
pub fn optimal_pr_curve(table: &PatternTable) -> Result<CurvePoints> {
    table.require_both_classes()?;
    let counts = table.counts();
    let np = u128::from(table.n_plus());
    let order = optimal_order(&counts);
    let mut points = Vec::with_capacity(table.m() as usize + 1);
    points.push((0.0, counts[order[0]].p_plus()));
    let (mut pos_before, mut seen) = (0u128, 0u128);
    for i in order {
        let (p, size) = (u128::from(counts[i].pos), u128::from(counts[i].total()));
        for t in 1..=size {
            let tp_scaled = size * pos_before + t * p;
            points.push((
                tp_scaled as f64 / (size * np) as f64,
                tp_scaled as f64 / (size * (seen + t)) as f64,
            ));
        }
        pos_before += p;
        seen += size;
    }
    Ok(CurvePoints::new(CurveKind::Pr, points))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::{auc_pr_upper, auc_roc_upper};

    fn t1() -> PatternTable {
        PatternTable::from_counts([("a", 2, 1), ("b", 1, 2)])
    }

    #[test]
    fn roc_t1() {
        let c = optimal_roc_curve(&t1()).unwrap();
        assert_eq!(c.points, [(0.0, 0.0), (1.0 / 3.0, 2.0 / 3.0), (1.0, 1.0)]);
        assert!((c.area - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn roc_separated_and_tied() {
        let sep = PatternTable::from_counts([("p", 1, 0), ("n", 0, 1)]);
        assert_eq!(
            optimal_roc_curve(&sep).unwrap().points,
            [(0.0, 0.0), (0.0, 1.0), (1.0, 1.0)]
        );
        let tied = PatternTable::from_counts([("x", 4, 4)]);
        assert_eq!(
            optimal_roc_curve(&tied).unwrap().points,
            [(0.0, 0.0), (1.0, 1.0)]
        );
    }

    #[test]
    fn pr_examples() {
        let sep = PatternTable::from_counts([("p", 3, 0), ("n", 0, 2)]);
        let c = optimal_pr_curve(&sep).unwrap();
        assert!(c.points.iter().take(4).all(|&(_, p)| p == 1.0));
        assert_eq!(c.area, 1.0);

        let tied = PatternTable::from_counts([("x", 5, 5)]);
        let c = optimal_pr_curve(&tied).unwrap();
        assert!(c.points.iter().all(|&(_, p)| p == 0.5));
        assert_eq!(c.area, 0.5);

        let c = optimal_pr_curve(&t1()).unwrap();
        assert!((c.area - 19.0 / 30.0).abs() < 1e-15);
        assert_eq!(c.points.last().unwrap().0, 1.0);
    }

    #[test]
    fn areas_match_bounds() {
        let t = PatternTable::from_counts([
            ("a", 7, 2),
            ("b", 1, 9),
            ("c", 4, 4),
            ("d", 0, 3),
            ("e", 5, 0),
        ]);
        let roc = optimal_roc_curve(&t).unwrap();
        let pr = optimal_pr_curve(&t).unwrap();
        assert!((roc.area - auc_roc_upper(&t).unwrap()).abs() < 1e-12);
        assert!((pr.area - auc_pr_upper(&t).unwrap()).abs() < 1e-12);
        assert!(roc.is_concave(1e-12));
    }

    #[test]
    fn csv_headers() {
        let mut buf = Vec::new();
        optimal_roc_curve(&t1())
            .unwrap()
            .write_csv(&mut buf)
            .unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("fpr,tpr\n0,0\n"));
        let mut buf = Vec::new();
        optimal_pr_curve(&t1())
            .unwrap()
            .write_csv(&mut buf)
            .unwrap();
        assert!(String::from_utf8(buf)
            .unwrap()
            .starts_with("recall,precision\n"));
    }
}
