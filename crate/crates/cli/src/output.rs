//! CSV and gnuplot script writers.

use std::io::{self, Write};
use std::path::{Component, Path, PathBuf};

use qlbn_core::{BeliefGrid, CurvePoint};

/// Label written in the region column for points whose evaluation failed.
pub const ERROR_REGION: &str = "Error";

pub fn grid_header(actions: &[String]) -> String {
    let mut cols = vec!["theta_a".to_string(), "theta_b".to_string()];
    cols.extend(actions.iter().map(|a| format!("prob_{a}")));
    cols.extend(actions.iter().map(|a| format!("eu_{a}")));
    cols.push("chosen".into());
    cols.push("region".into());
    cols.join(",")
}

/// One row per grid node, row-major with `theta_a` as the slow index.
pub fn write_grid_csv<W: Write>(grid: &BeliefGrid, mut out: W) -> io::Result<()> {
    writeln!(out, "{}", grid_header(&grid.actions))?;
    let n = grid.actions.len();
    for p in &grid.points {
        write!(out, "{:.6},{:.6}", p.theta_a, p.theta_b)?;
        match &p.evaluation {
            Ok(e) => {
                for v in e.probabilities.iter().chain(&e.utilities) {
                    write!(out, ",{v:.9}")?;
                }
                writeln!(out, ",{},{}", grid.actions[e.chosen], e.region)?;
            }
            Err(_) => {
                for _ in 0..2 * n {
                    out.write_all(b",NaN")?;
                }
                writeln!(out, ",-,{ERROR_REGION}")?;
            }
        }
    }
    out.flush()
}

pub fn write_curve_csv<W: Write>(states: &[String], curve: &[CurvePoint], mut out: W) -> io::Result<()> {
    write!(out, "theta")?;
    for s in states {
        write!(out, ",prob_{s}")?;
    }
    writeln!(out)?;
    for p in curve {
        write!(out, "{:.6}", p.theta)?;
        for v in &p.probabilities {
            write!(out, ",{v:.12}")?;
        }
        writeln!(out)?;
    }
    out.flush()
}

/// Path of `target` as seen from the directory holding `script`.
pub fn relative_to_script(target: &Path, script: &Path) -> PathBuf {
    let absolute = |p: &Path| -> PathBuf {
        let p = if p.is_absolute() {
            p.to_path_buf()
        } else {
            std::env::current_dir().unwrap_or_default().join(p)
        };
        let mut clean = PathBuf::new();
        for c in p.components() {
            match c {
                Component::CurDir => {}
                Component::ParentDir => {
                    clean.pop();
                }
                other => clean.push(other),
            }
        }
        clean
    };
    let target = absolute(target);
    let base = absolute(script);
    let base = base.parent().unwrap_or(Path::new("/"));
    let t: Vec<_> = target.components().collect();
    let b: Vec<_> = base.components().collect();
    let common = t.iter().zip(&b).take_while(|(x, y)| x == y).count();
    let mut rel = PathBuf::new();
    for _ in common..b.len() {
        rel.push("..");
    }
    for c in &t[common..] {
        rel.push(c);
    }
    rel
}

fn gnuplot_string(p: &Path) -> String {
    p.to_string_lossy().replace('\\', "/").replace('"', "\\\"")
}

/// Heatmaps of the region labels and of the first action's probability.
/// Run it from its own directory: `gnuplot sweep.gp`.
pub fn grid_plot_script(csv: &Path, script: &Path, grid: &BeliefGrid) -> String {
    let rel = gnuplot_string(&relative_to_script(csv, script));
    let png = gnuplot_string(
        Path::new(csv.file_stem().unwrap_or_default())
            .with_extension("png")
            .as_path(),
    );
    let first = &grid.actions[0];
    let region_col = 4 + 2 * grid.actions.len();
    format!(
        "# belief-space sweep, {res}x{res}, epsilon = {eps}
# run from this directory: gnuplot {name}
set datafile separator ','
set terminal pngcairo size 1400,640
set output \"{png}\"
set xrange [0:2*pi]
set yrange [0:2*pi]
set xlabel 'theta_b ({b})'
set ylabel 'theta_a ({a})'
region(s) = s eq 'Irrational' ? 2 : (s eq 'SubOptimal' ? 1 : (s eq 'FullyClassical' ? 0 : NaN))
set multiplot layout 1,2
set title 'region (0 classical, 1 sub-optimal, 2 irrational)'
set palette defined (0 '#d9d9d9', 1 '#fdae61', 2 '#d7191c')
set cbrange [0:2]
plot \"{rel}\" skip 1 using 2:1:(region(strcol({region_col}))) with image notitle
set title 'Pr_q({first})'
set palette rgbformulae 33,13,10
set cbrange [0:1]
plot \"{rel}\" skip 1 using 2:1:3 with image notitle
unset multiplot
",
        res = grid.resolution,
        eps = grid.epsilon,
        name = script.file_name().map(|n| n.to_string_lossy()).unwrap_or_default(),
        a = grid.actions[0],
        b = grid.actions[1],
    )
}

pub fn curve_plot_script(csv: &Path, script: &Path, states: &[String], axis_label: &str) -> String {
    let rel = gnuplot_string(&relative_to_script(csv, script));
    let png = gnuplot_string(
        Path::new(csv.file_stem().unwrap_or_default())
            .with_extension("png")
            .as_path(),
    );
    let lines: Vec<String> = states
        .iter()
        .enumerate()
        .map(|(i, s)| format!("\"{rel}\" skip 1 using 1:{} with lines title 'Pr_q({s})'", i + 2))
        .collect();
    format!(
        "# run from this directory: gnuplot {name}
set datafile separator ','
set terminal pngcairo size 900,560
set output \"{png}\"
set xrange [0:2*pi]
set yrange [0:1]
set xlabel '{axis_label}'
set ylabel 'probability'
plot {plots}
",
        name = script.file_name().map(|n| n.to_string_lossy()).unwrap_or_default(),
        plots = lines.join(", \\\n     "),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use qlbn_core::{pd, sweep};

    fn pd_grid(resolution: usize) -> BeliefGrid {
        let joint = pd::network().enumerate_joint().unwrap();
        let rule = pd::rule(&joint).unwrap();
        let ops = pd::utility_operators(&joint).unwrap();
        sweep(&joint, &ops, &rule, resolution, 0.05).unwrap()
    }

    #[test]
    fn header_is_fixed() {
        assert_eq!(
            grid_header(&["Def".into(), "Coop".into()]),
            "theta_a,theta_b,prob_Def,prob_Coop,eu_Def,eu_Coop,chosen,region"
        );
    }

    #[test]
    fn resolution_two_rows() {
        let mut buf = Vec::new();
        write_grid_csv(&pd_grid(2), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 5);
        assert!(lines[1].starts_with("0.000000,0.000000,"));
        assert!(lines[4].starts_with("6.283185,6.283185,"));
        for l in &lines {
            assert_eq!(l.split(',').count(), 8);
        }
        // both seams are the same physical point
        let tail = |l: &str| l.split_once(',').unwrap().1.split_once(',').unwrap().1.to_string();
        assert!(lines[1..].iter().all(|l| tail(l) == tail(lines[1])));
    }

    #[test]
    fn relative_paths() {
        assert_eq!(
            relative_to_script(Path::new("/a/b/x.csv"), Path::new("/a/b/x.gp")),
            PathBuf::from("x.csv")
        );
        assert_eq!(
            relative_to_script(Path::new("/a/data/x.csv"), Path::new("/a/plots/x.gp")),
            PathBuf::from("../data/x.csv")
        );
        assert_eq!(
            relative_to_script(Path::new("/a/b/c/x.csv"), Path::new("/a/x.gp")),
            PathBuf::from("b/c/x.csv")
        );
    }

    #[test]
    fn plot_script_references_csv() {
        let grid = pd_grid(3);
        let s = grid_plot_script(Path::new("/tmp/run/out/grid.csv"), Path::new("/tmp/run/grid.gp"), &grid);
        assert!(s.contains("\"out/grid.csv\""));
        assert!(s.contains("strcol(8)"));
        assert!(s.contains("set output \"grid.png\""));
    }
}
