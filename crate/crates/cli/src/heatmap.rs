//! PNG heatmaps of sweep grids: linear color scale, labeled axes, and a
//! distinct overlay for cells whose flag is not `ok`.
//!
//! Text is drawn with a small built-in 5×7 pixel font so rendering needs no
//! system fonts and is bit-reproducible.

use anyhow::{bail, Context, Result};
use image::{Rgb, RgbImage};
use parqed::metrics::MetricKind;
use parqed::sweep::{AxisSpec, CellStatus, SweepGrid};
use std::path::Path;

const MARGIN_LEFT: u32 = 64;
const MARGIN_BOTTOM: u32 = 36;
const MARGIN_TOP: u32 = 22;
const MARGIN_RIGHT: u32 = 72;

/// Linear multi-stop gradient (dark blue → teal → green → yellow).
fn colormap(v: f64) -> Rgb<u8> {
    let stops: [(f64, [f64; 3]); 5] = [
        (0.00, [0.05, 0.03, 0.35]),
        (0.25, [0.12, 0.32, 0.65]),
        (0.50, [0.06, 0.60, 0.55]),
        (0.75, [0.55, 0.83, 0.25]),
        (1.00, [0.99, 0.95, 0.15]),
    ];
    let v = v.clamp(0.0, 1.0);
    let mut lo = stops[0];
    let mut hi = stops[stops.len() - 1];
    for w in stops.windows(2) {
        if v >= w[0].0 && v <= w[1].0 {
            lo = w[0];
            hi = w[1];
            break;
        }
    }
    let f = if hi.0 > lo.0 { (v - lo.0) / (hi.0 - lo.0) } else { 0.0 };
    let mix = |a: f64, b: f64| ((a + (b - a) * f) * 255.0).round() as u8;
    Rgb([
        mix(lo.1[0], hi.1[0]),
        mix(lo.1[1], hi.1[1]),
        mix(lo.1[2], hi.1[2]),
    ])
}

/// 5×7 glyphs; rows top to bottom, 'X' marks a lit pixel.
fn glyph(ch: char) -> [&'static str; 7] {
    match ch.to_ascii_lowercase() {
        '0' => [".XXX.", "X...X", "X..XX", "X.X.X", "XX..X", "X...X", ".XXX."],
        '1' => ["..X..", ".XX..", "..X..", "..X..", "..X..", "..X..", ".XXX."],
        '2' => [".XXX.", "X...X", "....X", "...X.", "..X..", ".X...", "XXXXX"],
        '3' => [".XXX.", "X...X", "....X", "..XX.", "....X", "X...X", ".XXX."],
        '4' => ["...X.", "..XX.", ".X.X.", "X..X.", "XXXXX", "...X.", "...X."],
        '5' => ["XXXXX", "X....", "XXXX.", "....X", "....X", "X...X", ".XXX."],
        '6' => [".XXX.", "X....", "X....", "XXXX.", "X...X", "X...X", ".XXX."],
        '7' => ["XXXXX", "....X", "...X.", "..X..", ".X...", ".X...", ".X..."],
        '8' => [".XXX.", "X...X", "X...X", ".XXX.", "X...X", "X...X", ".XXX."],
        '9' => [".XXX.", "X...X", "X...X", ".XXXX", "....X", "....X", ".XXX."],
        'a' => [".....", ".....", ".XXX.", "....X", ".XXXX", "X...X", ".XXXX"],
        'b' => ["X....", "X....", "XXXX.", "X...X", "X...X", "X...X", "XXXX."],
        'c' => [".....", ".....", ".XXX.", "X....", "X....", "X...X", ".XXX."],
        'd' => ["....X", "....X", ".XXXX", "X...X", "X...X", "X...X", ".XXXX"],
        'e' => [".....", ".....", ".XXX.", "X...X", "XXXXX", "X....", ".XXX."],
        'f' => ["..XX.", ".X...", "XXXX.", ".X...", ".X...", ".X...", ".X..."],
        'g' => [".....", ".XXXX", "X...X", "X...X", ".XXXX", "....X", ".XXX."],
        'h' => ["X....", "X....", "XXXX.", "X...X", "X...X", "X...X", "X...X"],
        'i' => ["..X..", ".....", ".XX..", "..X..", "..X..", "..X..", ".XXX."],
        'j' => ["...X.", ".....", "..XX.", "...X.", "...X.", "X..X.", ".XX.."],
        'k' => ["X....", "X....", "X..X.", "X.X..", "XX...", "X.X..", "X..X."],
        'l' => [".XX..", "..X..", "..X..", "..X..", "..X..", "..X..", ".XXX."],
        'm' => [".....", ".....", "XX.X.", "X.X.X", "X.X.X", "X.X.X", "X.X.X"],
        'n' => [".....", ".....", "XXXX.", "X...X", "X...X", "X...X", "X...X"],
        'o' => [".....", ".....", ".XXX.", "X...X", "X...X", "X...X", ".XXX."],
        'p' => [".....", "XXXX.", "X...X", "X...X", "XXXX.", "X....", "X...."],
        'q' => [".....", ".XXXX", "X...X", "X...X", ".XXXX", "....X", "....X"],
        'r' => [".....", ".....", "X.XX.", "XX..X", "X....", "X....", "X...."],
        's' => [".....", ".....", ".XXXX", "X....", ".XXX.", "....X", "XXXX."],
        't' => [".X...", ".X...", "XXXX.", ".X...", ".X...", ".X..X", "..XX."],
        'u' => [".....", ".....", "X...X", "X...X", "X...X", "X..XX", ".XX.X"],
        'v' => [".....", ".....", "X...X", "X...X", "X...X", ".X.X.", "..X.."],
        'w' => [".....", ".....", "X...X", "X...X", "X.X.X", "X.X.X", ".X.X."],
        'x' => [".....", ".....", "X...X", ".X.X.", "..X..", ".X.X.", "X...X"],
        'y' => [".....", "X...X", "X...X", ".XXXX", "....X", "X...X", ".XXX."],
        'z' => [".....", ".....", "XXXXX", "...X.", "..X..", ".X...", "XXXXX"],
        '.' => [".....", ".....", ".....", ".....", ".....", ".XX..", ".XX.."],
        '-' => [".....", ".....", ".....", "XXXX.", ".....", ".....", "....."],
        '+' => [".....", "..X..", "..X..", "XXXXX", "..X..", "..X..", "....."],
        ':' => [".....", ".XX..", ".XX..", ".....", ".XX..", ".XX..", "....."],
        '/' => ["....X", "...X.", "...X.", "..X..", ".X...", ".X...", "X...."],
        _ => [".....", ".....", ".....", ".....", ".....", ".....", "....."],
    }
}

fn draw_text(img: &mut RgbImage, x: i64, y: i64, text: &str, color: Rgb<u8>) {
    let mut cx = x;
    for ch in text.chars() {
        if ch != ' ' {
            let rows = glyph(ch);
            for (ry, row) in rows.iter().enumerate() {
                for (rx, cell) in row.chars().enumerate() {
                    if cell == 'X' {
                        let px = cx + rx as i64;
                        let py = y + ry as i64;
                        if px >= 0 && py >= 0 && (px as u32) < img.width() && (py as u32) < img.height()
                        {
                            img.put_pixel(px as u32, py as u32, color);
                        }
                    }
                }
            }
        }
        cx += 6;
    }
}

fn short_number(v: f64) -> String {
    if v == 0.0 {
        "0".to_string()
    } else if v.abs() >= 0.01 && v.abs() < 1000.0 {
        format!("{v:.3}")
    } else {
        format!("{v:.2e}")
    }
}

/// Options controlling the rendering.
#[derive(Clone, Debug)]
pub struct HeatmapStyle {
    /// Target pixel size of one grid cell (clamped so images stay reasonable).
    pub cell_px: u32,
}

impl Default for HeatmapStyle {
    fn default() -> Self {
        HeatmapStyle { cell_px: 6 }
    }
}

/// Render one channel of a sweep grid to a PNG file.
///
/// The color scale is linear between the finite min and max of the channel;
/// flagged cells are overlaid with a gray hatch. A constant channel renders
/// in a single color and logs a degenerate-scale warning.
pub fn render_heatmap(
    grid: &SweepGrid<f64>,
    kind: MetricKind,
    style: &HeatmapStyle,
    path: &Path,
) -> Result<()> {
    let values = grid
        .channel(kind)
        .with_context(|| format!("channel '{}' not present in the grid", kind.name()))?;
    if grid.nx() == 0 || grid.ny() == 0 {
        bail!("empty grid");
    }

    let finite: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
    if finite.is_empty() {
        bail!("channel '{}' has no finite values", kind.name());
    }
    let lo = finite.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = finite.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let degenerate = !(hi > lo);
    if degenerate {
        log::warn!(
            "channel '{}' is constant at {lo}; rendering a single color (degenerate scale)",
            kind.name()
        );
    }

    let cell = style.cell_px.clamp(2, 64);
    let plot_w = (grid.nx() as u32 * cell).max(64);
    let plot_h = (grid.ny() as u32 * cell).max(64);
    let width = MARGIN_LEFT + plot_w + MARGIN_RIGHT;
    let height = MARGIN_TOP + plot_h + MARGIN_BOTTOM;
    let mut img = RgbImage::from_pixel(width, height, Rgb([252, 252, 252]));

    // cells; y axis points up (row iy = 0 at the bottom)
    for iy in 0..grid.ny() {
        for ix in 0..grid.nx() {
            let idx = iy * grid.nx() + ix;
            let v = values[idx];
            let color = if !v.is_finite() {
                Rgb([200, 200, 200])
            } else if degenerate {
                colormap(0.5)
            } else {
                colormap((v - lo) / (hi - lo))
            };
            let x0 = MARGIN_LEFT + ix as u32 * cell;
            let y0 = MARGIN_TOP + plot_h - (iy as u32 + 1) * cell;
            for dy in 0..cell {
                for dx in 0..cell {
                    img.put_pixel(x0 + dx, y0 + dy, color);
                }
            }
            if grid.status[idx] != CellStatus::Ok {
                // gray hatch marks a flagged cell
                for dy in 0..cell {
                    for dx in 0..cell {
                        if (dx + dy) % 4 == 0 {
                            img.put_pixel(x0 + dx, y0 + dy, Rgb([90, 90, 90]));
                        }
                    }
                }
            }
        }
    }

    let ink = Rgb([20, 20, 20]);
    // frame
    for x in MARGIN_LEFT..MARGIN_LEFT + plot_w {
        img.put_pixel(x, MARGIN_TOP + plot_h, ink);
    }
    for y in MARGIN_TOP..=MARGIN_TOP + plot_h {
        img.put_pixel(MARGIN_LEFT - 1, y, ink);
    }

    // axis labels and end-tick values
    draw_text(&mut img, 4, 2, &kind.name(), ink);
    let x_label_y = (MARGIN_TOP + plot_h + 18) as i64;
    draw_text(&mut img, MARGIN_LEFT as i64, x_label_y + 9, &grid.x.name, ink);
    draw_text(
        &mut img,
        MARGIN_LEFT as i64,
        x_label_y,
        &short_number(first(&grid.x)),
        ink,
    );
    let x_end = short_number(last(&grid.x));
    draw_text(
        &mut img,
        (MARGIN_LEFT + plot_w) as i64 - 6 * x_end.len() as i64,
        x_label_y,
        &x_end,
        ink,
    );
    draw_text(&mut img, 4, MARGIN_TOP as i64 - 10, &grid.y.name, ink);
    draw_text(
        &mut img,
        4,
        (MARGIN_TOP + plot_h) as i64 - 8,
        &short_number(first(&grid.y)),
        ink,
    );
    draw_text(&mut img, 4, MARGIN_TOP as i64 + 2, &short_number(last(&grid.y)), ink);

    // color bar
    let bar_x = MARGIN_LEFT + plot_w + 12;
    for by in 0..plot_h {
        let v = 1.0 - by as f64 / plot_h.max(1) as f64;
        let color = colormap(v);
        for bx in 0..10 {
            img.put_pixel(bar_x + bx, MARGIN_TOP + by, color);
        }
    }
    draw_text(
        &mut img,
        (bar_x + 12) as i64,
        MARGIN_TOP as i64,
        &short_number(hi),
        ink,
    );
    draw_text(
        &mut img,
        (bar_x + 12) as i64,
        (MARGIN_TOP + plot_h) as i64 - 7,
        &short_number(lo),
        ink,
    );

    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)
            .with_context(|| format!("creating directory {}", parent.display()))?;
    }
    img.save(path)
        .with_context(|| format!("writing image {}", path.display()))?;
    Ok(())
}

fn first(axis: &AxisSpec<f64>) -> f64 {
    *axis.values.first().unwrap_or(&0.0)
}

fn last(axis: &AxisSpec<f64>) -> f64 {
    *axis.values.last().unwrap_or(&0.0)
}

/// Read a sweep channel back from its CSV (x,y,value) plus optional status
/// CSV, reconstructing the grid for rendering.
pub fn grid_from_csv(channel_csv: &str, status_csv: Option<&str>) -> Result<(SweepGrid<f64>, MetricKind)> {
    let mut lines = channel_csv
        .lines()
        .filter(|l| !l.trim_start().starts_with('#') && !l.trim().is_empty());
    let header = lines.next().context("channel CSV has no header")?;
    let cols: Vec<&str> = header.split(',').collect();
    if cols.len() != 3 {
        bail!("channel CSV header must be <x>,<y>,<metric>, got '{header}'");
    }
    let kind: MetricKind = cols[2]
        .trim()
        .parse()
        .map_err(|e| anyhow::anyhow!("bad metric column '{}': {e}", cols[2]))?;

    let mut xs: Vec<f64> = Vec::new();
    let mut ys: Vec<f64> = Vec::new();
    let mut entries: Vec<(f64, f64, f64)> = Vec::new();
    for line in lines {
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 3 {
            bail!("bad CSV row '{line}'");
        }
        let x: f64 = parts[0].trim().parse().context("bad x value")?;
        let y: f64 = parts[1].trim().parse().context("bad y value")?;
        let v: f64 = parts[2].trim().parse().context("bad metric value")?;
        if !xs.contains(&x) {
            xs.push(x);
        }
        if !ys.contains(&y) {
            ys.push(y);
        }
        entries.push((x, y, v));
    }
    if entries.is_empty() {
        bail!("channel CSV has no data rows");
    }
    let nx = xs.len();
    let ny = ys.len();
    if entries.len() != nx * ny {
        bail!("CSV is not a full grid: {} rows for {nx}x{ny}", entries.len());
    }
    let mut values = vec![f64::NAN; nx * ny];
    for (x, y, v) in entries {
        let ix = xs.iter().position(|&a| a == x).unwrap();
        let iy = ys.iter().position(|&a| a == y).unwrap();
        values[iy * nx + ix] = v;
    }

    let mut status = vec![CellStatus::Ok; nx * ny];
    if let Some(text) = status_csv {
        let mut lines = text
            .lines()
            .filter(|l| !l.trim_start().starts_with('#') && !l.trim().is_empty());
        let _header = lines.next();
        for line in lines {
            let parts: Vec<&str> = line.split(',').collect();
            if parts.len() != 3 {
                bail!("bad status row '{line}'");
            }
            let x: f64 = parts[0].trim().parse().context("bad x value")?;
            let y: f64 = parts[1].trim().parse().context("bad y value")?;
            let s: CellStatus = parts[2]
                .trim()
                .parse()
                .map_err(|e| anyhow::anyhow!("bad status '{}': {e}", parts[2]))?;
            let ix = xs
                .iter()
                .position(|&a| a == x)
                .context("status x not on grid")?;
            let iy = ys
                .iter()
                .position(|&a| a == y)
                .context("status y not on grid")?;
            status[iy * nx + ix] = s;
        }
    }

    Ok((
        SweepGrid {
            x: AxisSpec::new("x", xs),
            y: AxisSpec::new("y", ys),
            channels: vec![(kind, values)],
            status,
        },
        kind,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn colormap_endpoints() {
        assert_eq!(colormap(0.0), Rgb([13, 8, 89]));
        let Rgb([r, g, _b]) = colormap(1.0);
        assert!(r > 240 && g > 230);
    }

    #[test]
    fn csv_round_trip_reconstructs_grid() {
        let grid = SweepGrid {
            x: AxisSpec::new("kappa", vec![0.1, 0.2, 0.3]),
            y: AxisSpec::new("theta", vec![0.5, 0.6]),
            channels: vec![(
                MetricKind::Concurrence,
                vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0],
            )],
            status: vec![CellStatus::Ok; 6],
        };
        let csv = crate::output::sweep_channel_csv(&grid, MetricKind::Concurrence).unwrap();
        let (back, kind) = grid_from_csv(&csv, None).unwrap();
        assert_eq!(kind, MetricKind::Concurrence);
        assert_eq!(back.nx(), 3);
        assert_eq!(back.ny(), 2);
        assert_eq!(back.value(kind, 2, 1), Some(6.0));
    }
}
