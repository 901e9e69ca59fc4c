use std::fmt::Write;

use super::plan::FabricationPlan;

/// Which of the two points of a joint a mark represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FoldPoint {
    /// The point nearer the base, at the joint's axial start.
    First,
    /// The point `s̃` further along the tube.
    Second,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PatternMark {
    pub joint: usize,
    pub point: FoldPoint,
    /// Circumferential coordinate in mm, in `[0, width)`.
    pub x: f64,
    /// Axial coordinate in mm from the tube base.
    pub y: f64,
}

impl PatternMark {
    pub fn label(&self) -> String {
        let suffix = match self.point {
            FoldPoint::First => 'a',
            FoldPoint::Second => 'b',
        };
        format!("J{}{}", self.joint, suffix)
    }
}

/// The tube cut open along `x = 0` and laid flat: a `2πr` by
/// total-tube-length rectangle.
#[derive(Debug, Clone, PartialEq)]
pub struct FlatPattern {
    pub width: f64,
    pub height: f64,
    pub marks: Vec<PatternMark>,
    /// Axial coordinates of cylinder ends (dashed lines).
    pub boundaries: Vec<f64>,
}

pub fn flat_pattern(plan: &FabricationPlan) -> FlatPattern {
    let width = plan.circumference();
    let mut marks = Vec::new();
    for joint in plan.joints.iter().filter(|j| j.has_fold()) {
        let x = joint.circumferential.rem_euclid(width);
        marks.push(PatternMark {
            joint: joint.index,
            point: FoldPoint::First,
            x,
            y: joint.axial_start,
        });
        marks.push(PatternMark {
            joint: joint.index,
            point: FoldPoint::Second,
            x,
            y: joint.axial_start + joint.s_tilde,
        });
    }
    let mut boundaries = Vec::new();
    for (start, end) in plan.cylinder_spans() {
        for y in [start, end] {
            if y > 0.0 && y < plan.total_tube_length && boundaries.last() != Some(&y) {
                boundaries.push(y);
            }
        }
    }
    FlatPattern {
        width,
        height: plan.total_tube_length,
        marks,
        boundaries,
    }
}

fn num(x: f64) -> String {
    let s = format!("{x:.3}");
    if s == "-0.000" {
        "0.000".to_string()
    } else {
        s
    }
}

impl FlatPattern {
    /// Renders at 1:1 scale (one user unit per mm). x is circumferential and
    /// y is axial with the tube base at the origin.
    pub fn to_svg(&self) -> String {
        let (w, h) = (num(self.width), num(self.height));
        let mut out = String::new();
        let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}mm" height="{h}mm" viewBox="0 0 {w} {h}">"#
        );
        let _ = writeln!(
            out,
            r#"  <rect id="outline" x="0" y="0" width="{w}" height="{h}" fill="none" stroke="black" stroke-width="0.3"/>"#
        );
        for y in &self.boundaries {
            let y = num(*y);
            let _ = writeln!(
                out,
                r#"  <line class="cylinder-boundary" x1="0" y1="{y}" x2="{w}" y2="{y}" stroke="gray" stroke-width="0.2" stroke-dasharray="2,1"/>"#
            );
        }
        for pair in self.marks.chunks(2) {
            if let [a, b] = pair {
                let _ = writeln!(
                    out,
                    r#"  <line class="fold" x1="{}" y1="{}" x2="{}" y2="{}" stroke="red" stroke-width="0.2"/>"#,
                    num(a.x),
                    num(a.y),
                    num(b.x),
                    num(b.y)
                );
            }
        }
        for m in &self.marks {
            let (x, y) = (num(m.x), num(m.y));
            let _ = writeln!(
                out,
                r#"  <circle class="joint-point" id="{}" cx="{x}" cy="{y}" r="1" fill="red"/>"#,
                m.label()
            );
            let _ = writeln!(
                out,
                r#"  <text x="{}" y="{y}" font-size="3" font-family="sans-serif">{}</text>"#,
                num(m.x + 1.5),
                m.label()
            );
        }
        out.push_str("</svg>\n");
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fabrication::{compile_plan, GapModel, Method};
    use crate::geometry::{DHChain, DHLink};

    #[test]
    fn straight_chain_has_no_marks() {
        let chain = DHChain::new(vec![DHLink::new(100.0, 0.0, 0.0); 2], 16.5).unwrap();
        let plan = compile_plan(&chain, &GapModel::default_for(Method::Tape)).unwrap();
        let pat = flat_pattern(&plan);
        assert!(pat.marks.is_empty());
        assert_eq!(pat.height, 200.0);
        let svg = pat.to_svg();
        assert!(!svg.contains("joint-point"));
        assert!(svg.contains(r#"viewBox="0 0 103.673 200.000""#));
    }

    #[test]
    fn reference_pattern_offsets_second_pair() {
        let plan = compile_plan(
            &DHChain::three_link_reference(),
            &GapModel::default_for(Method::Tape),
        )
        .unwrap();
        let pat = flat_pattern(&plan);
        assert_eq!(pat.marks.len(), 4);
        assert_eq!(pat.marks[0].x, pat.marks[1].x);
        assert!((pat.marks[2].x - pat.marks[0].x - 12.959).abs() < 1e-3);
        assert!((pat.marks[1].y - pat.marks[0].y - 25.918).abs() < 1e-3);
        let svg = pat.to_svg();
        assert_eq!(svg.matches("joint-point").count(), 4);
        assert!(svg.contains(r#"id="J3b""#));
    }

    #[test]
    fn wraparound_mark_is_reduced() {
        let q = std::f64::consts::FRAC_PI_4;
        let chain = DHChain::new(
            vec![
                DHLink::new(100.0, 3.0, q),
                DHLink::new(100.0, 3.0, q),
                DHLink::new(100.0, 3.0, q),
                DHLink::new(100.0, 0.0, q),
            ],
            16.5,
        )
        .unwrap();
        let plan = compile_plan(&chain, &GapModel::default_for(Method::Tape)).unwrap();
        let pat = flat_pattern(&plan);
        let width = 2.0 * std::f64::consts::PI * 16.5;
        assert!(9.0 * 16.5 > width);
        let expect = 9.0 * 16.5 - width;
        assert!((pat.marks[6].x - expect).abs() < 1e-9);
        assert!(pat.marks.iter().all(|m| m.x >= 0.0 && m.x < width));
    }
}
