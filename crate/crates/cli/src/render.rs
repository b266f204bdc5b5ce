//! SVG drawings of layouts and replay storyboards.

use std::fmt::Write;

use robolayout::layout::Element;
use robolayout::motion::{MotionProblem, Trajectories};
use robolayout::{JunctionKind, Layout, Point, Scene};

const PX: f64 = 80.0;
const MARGIN: f64 = 1.0;

pub fn robot_color(kind: &str) -> &'static str {
    match kind {
        "UR5e" => "#1f77b4",
        "IRB4600" => "#ff7f0e",
        _ => "#7f7f7f",
    }
}

const BELT_COLOR: &str = "#8e44ad";

/// Axis-aligned drawing area in scene coordinates.
struct Frame {
    min: Point,
    max: Point,
}

impl Frame {
    fn around(scene: &Scene) -> Frame {
        let mut min = scene.floor.min;
        let mut max = scene.floor.max;
        for p in std::iter::once(scene.input).chain(scene.outputs.iter().map(|o| o.pos)) {
            min = Point::new(min.x.min(p.x), min.y.min(p.y));
            max = Point::new(max.x.max(p.x), max.y.max(p.y));
        }
        Frame {
            min: Point::new(min.x - MARGIN, min.y - MARGIN),
            max: Point::new(max.x + MARGIN, max.y + MARGIN),
        }
    }

    fn width(&self) -> f64 {
        (self.max.x - self.min.x) * PX
    }

    fn height(&self) -> f64 {
        (self.max.y - self.min.y) * PX
    }

    /// Pixel coordinates with y pointing down.
    fn px(&self, p: Point) -> (f64, f64) {
        ((p.x - self.min.x) * PX, (self.max.y - p.y) * PX)
    }
}

fn vertex_point(scene: &Scene, layout: &Layout, v: usize) -> Option<Point> {
    if v == 0 {
        return Some(scene.input);
    }
    if v <= scene.outputs.len() {
        return Some(scene.outputs[v - 1].pos);
    }
    match layout.element(v)? {
        Element::Robot(r) => Some(r.pos()),
        Element::Belt(b) => Some((b.from + b.to).scale(0.5)),
    }
}

fn draw_scene_body(out: &mut String, f: &Frame, scene: &Scene, layout: &Layout) {
    let (x0, y0) = f.px(Point::new(scene.floor.min.x, scene.floor.max.y));
    let (x1, y1) = f.px(Point::new(scene.floor.max.x, scene.floor.min.y));
    let _ = writeln!(
        out,
        r##"<rect class="floor" x="{x0:.1}" y="{y0:.1}" width="{:.1}" height="{:.1}" fill="#f4f4f4" stroke="#999"/>"##,
        (x1 - x0).max(1.0),
        (y1 - y0).max(1.0)
    );
    for b in &layout.belts {
        let (ax, ay) = f.px(b.from);
        let (bx, by) = f.px(b.to);
        let _ = writeln!(
            out,
            r#"<line class="glyph belt" data-id="{}" x1="{ax:.1}" y1="{ay:.1}" x2="{bx:.1}" y2="{by:.1}" stroke="{BELT_COLOR}" stroke-width="8" stroke-linecap="round"/>"#,
            b.id
        );
    }
    for r in &layout.robots {
        let (x, y) = f.px(r.pos());
        let _ = writeln!(
            out,
            r#"<circle class="glyph robot" data-id="{}" data-type="{}" cx="{x:.1}" cy="{y:.1}" r="10" fill="{}"/>"#,
            r.id,
            r.robot_type,
            robot_color(&r.robot_type)
        );
    }
    for j in &layout.junctions {
        let (x, y) = f.px(Point::new(j.x, j.y));
        let kind = match j.kind {
            JunctionKind::Inline => "inline",
            JunctionKind::MultiWay => "multiway",
            JunctionKind::Turning => "turning",
        };
        let _ = writeln!(
            out,
            r##"<rect class="glyph junction {kind}" x="{:.1}" y="{:.1}" width="8" height="8" fill="#222"/>"##,
            x - 4.0,
            y - 4.0
        );
    }
    let (ix, iy) = f.px(scene.input);
    let _ = writeln!(out, r##"<rect class="port input" x="{:.1}" y="{:.1}" width="12" height="12" fill="#2ca02c"/>"##, ix - 6.0, iy - 6.0);
    for o in &scene.outputs {
        let (x, y) = f.px(o.pos);
        let _ = writeln!(out, r##"<rect class="port output" x="{:.1}" y="{:.1}" width="12" height="12" fill="#d62728"/>"##, x - 6.0, y - 6.0);
    }
}

/// Floor, ports, one `glyph` element per placed robot, belt and junction,
/// and one polyline per delivery path.
pub fn render_layout(scene: &Scene, layout: &Layout) -> String {
    let f = Frame::around(scene);
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{:.0}" height="{:.0}" viewBox="0 0 {:.1} {:.1}">"#,
        f.width(),
        f.height(),
        f.width(),
        f.height()
    );
    draw_scene_body(&mut out, &f, scene, layout);
    for (i, path) in layout.paths.iter().enumerate() {
        let pts: Vec<String> = path
            .iter()
            .filter_map(|&v| vertex_point(scene, layout, v))
            .map(|p| {
                let (x, y) = f.px(p);
                format!("{x:.1},{y:.1}")
            })
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline class="path" data-box="{i}" points="{}" fill="none" stroke="black" stroke-dasharray="4 3" stroke-width="1.5"/>"#,
            pts.join(" ")
        );
    }
    out.push_str("</svg>\n");
    out
}

/// One panel per `every` steps showing every arm's links.
pub fn render_storyboard(
    scene: &Scene,
    layout: &Layout,
    problem: &MotionProblem,
    traj: &Trajectories,
    every: usize,
) -> String {
    let f = Frame::around(scene);
    let every = every.max(1);
    let steps: Vec<usize> = (0..traj.steps).step_by(every).collect();
    let cols = steps.len().clamp(1, 4);
    let rows = steps.len().div_ceil(cols).max(1);
    let (w, h) = (f.width(), f.height() + 20.0);
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{:.0}" height="{:.0}">"#,
        w * cols as f64,
        h * rows as f64
    );
    for (k, &t) in steps.iter().enumerate() {
        let (dx, dy) = ((k % cols) as f64 * w, (k / cols) as f64 * h);
        let _ = writeln!(out, r#"<g class="frame" data-step="{t}" transform="translate({dx:.1},{dy:.1})">"#);
        let _ = writeln!(out, r#"<text x="6" y="14" font-size="12">step {t}</text>"#);
        let _ = writeln!(out, r#"<g transform="translate(0,20)">"#);
        draw_scene_body(&mut out, &f, scene, layout);
        for (arm, tr) in problem.arms.iter().zip(&traj.arms) {
            let q = tr.joints[t.min(tr.joints.len() - 1)];
            let pts: Vec<String> = arm
                .joint_points(&q)
                .iter()
                .map(|&p| {
                    let (x, y) = f.px(p);
                    format!("{x:.1},{y:.1}")
                })
                .collect();
            let _ = writeln!(
                out,
                r##"<polyline class="arm" data-id="{}" points="{}" fill="none" stroke="#333" stroke-width="3"/>"##,
                arm.vertex,
                pts.join(" ")
            );
        }
        out.push_str("</g></g>\n");
    }
    out.push_str("</svg>\n");
    out
}

/// Number of `glyph` elements in an SVG document.
#[cfg(test)]
pub fn count_glyphs(svg: &str) -> usize {
    svg.matches("class=\"glyph").count()
}
