//! SVG rendering of instances, zone boundaries and tours.
//!
//! Output is deterministic byte-for-byte for fixed inputs: elements emit in a
//! fixed order (boundaries, tour, vertices by id) and every coordinate is
//! formatted with two decimals.

use crate::tsplib::{Instance, VertexId};
use crate::zoning::ZonePlan;

const WIDTH: f64 = 900.0;
const HEIGHT: f64 = 640.0;
const MARGIN: f64 = 40.0;

struct Frame {
    min_x: f64,
    min_y: f64,
    scale: f64,
}

impl Frame {
    fn fit(inst: &Instance) -> Frame {
        let mut min_x = f64::INFINITY;
        let mut max_x = f64::NEG_INFINITY;
        let mut min_y = f64::INFINITY;
        let mut max_y = f64::NEG_INFINITY;
        for id in inst.vertex_ids() {
            let (x, y) = inst.coord(id);
            min_x = min_x.min(x);
            max_x = max_x.max(x);
            min_y = min_y.min(y);
            max_y = max_y.max(y);
        }
        let span_x = (max_x - min_x).max(1.0);
        let span_y = (max_y - min_y).max(1.0);
        let scale = ((WIDTH - 2.0 * MARGIN) / span_x).min((HEIGHT - 2.0 * MARGIN) / span_y);
        Frame { min_x, min_y, scale }
    }

    fn x(&self, x: f64) -> f64 {
        MARGIN + (x - self.min_x) * self.scale
    }

    // SVG y grows downward
    fn y(&self, y: f64) -> f64 {
        HEIGHT - MARGIN - (y - self.min_y) * self.scale
    }
}

/// Render the instance, zone boundary lines (one vertical line between each
/// pair of consecutive zones' x-extents) and optionally a closed tour.
pub fn render(inst: &Instance, plan: Option<&ZonePlan>, tour: Option<&[VertexId]>) -> String {
    let frame = Frame::fit(inst);
    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    ));
    out.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");

    if let Some(plan) = plan {
        for w in plan.zones.windows(2) {
            let left_max = w[0]
                .own_vertices
                .iter()
                .map(|&v| inst.coord(v).0)
                .fold(f64::NEG_INFINITY, f64::max);
            let right_min = w[1]
                .own_vertices
                .iter()
                .map(|&v| inst.coord(v).0)
                .fold(f64::INFINITY, f64::min);
            let bx = frame.x((left_max + right_min) / 2.0);
            out.push_str(&format!(
                "<polyline points=\"{:.2},{:.2} {:.2},{:.2}\" stroke=\"#999\" stroke-dasharray=\"6 4\" fill=\"none\"/>\n",
                bx,
                MARGIN / 2.0,
                bx,
                HEIGHT - MARGIN / 2.0
            ));
        }
    }

    if let Some(tour) = tour {
        let pts: Vec<String> = tour
            .iter()
            .chain(tour.first())
            .map(|&v| {
                let (x, y) = inst.coord(v);
                format!("{:.2},{:.2}", frame.x(x), frame.y(y))
            })
            .collect();
        out.push_str(&format!(
            "<polyline points=\"{}\" stroke=\"#1f6fb2\" stroke-width=\"1.5\" fill=\"none\"/>\n",
            pts.join(" ")
        ));
    }

    for id in inst.vertex_ids() {
        let (x, y) = inst.coord(id);
        let (cx, cy) = (frame.x(x), frame.y(y));
        out.push_str(&format!(
            "<circle cx=\"{cx:.2}\" cy=\"{cy:.2}\" r=\"4\" fill=\"#d9480f\"/>\n"
        ));
        out.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"10\" font-family=\"sans-serif\">{id}</text>\n",
            cx + 5.0,
            cy - 5.0
        ));
    }

    out.push_str("</svg>\n");
    out
}
