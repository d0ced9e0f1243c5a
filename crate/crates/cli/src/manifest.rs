//! Figure manifest consumed by the plotting tool. Paths are relative to the
//! directory holding the manifest.

use serde::Serialize;

use threewave_core::integrator::MlPair;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Series {
    pub csv: String,
    pub x: String,
    pub y: String,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Figure {
    pub id: String,
    pub series: Vec<Series>,
    pub x_label: String,
    pub y_label: String,
    /// Plotted range of the x column.
    pub x_range: Option<[f64; 2]>,
    pub output: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlotManifest {
    pub preset: String,
    pub figures: Vec<Figure>,
}

/// Names of the files a reproduction run writes.
#[derive(Debug, Clone)]
pub struct ReproFiles<'a> {
    pub timeseries: &'a str,
    /// Clipped snapshot CSVs at `t = 0, 1, 10`.
    pub snapshots: [&'a str; 3],
}

fn series(csv: &str, x: &str, y: &str, label: &str) -> Series {
    Series {
        csv: csv.into(),
        x: x.into(),
        y: y.into(),
        label: label.into(),
    }
}

fn figure(id: &str, series: Vec<Series>, x_label: &str, y_label: &str, x_range: Option<[f64; 2]>) -> Figure {
    Figure {
        id: id.into(),
        series,
        x_label: x_label.into(),
        y_label: y_label.into(),
        x_range,
        output: format!("figures/{id}.png"),
    }
}

pub fn repro_manifest(preset: &str, files: &ReproFiles, ml_pairs: &[MlPair]) -> PlotManifest {
    let ts = files.timeseries;
    let early = Some([0.0, 1.0]);
    let clip = Some([0.0, 10.0]);
    let mut figures = vec![
        figure("initial_data", vec![series(files.snapshots[0], "x", "f", "t = 0")], "x", "f", clip),
        figure("solution_T1", vec![series(files.snapshots[1], "x", "f", "t = 1")], "x", "f", clip),
        figure("solution_T10", vec![series(files.snapshots[2], "x", "f", "t = 10")], "x", "f", clip),
        figure(
            "moments_m1_m2",
            vec![series(ts, "t", "m1", "m1"), series(ts, "t", "m2", "m2")],
            "t",
            "moment",
            early,
        ),
        figure(
            "moments_m3_m4",
            vec![series(ts, "t", "m3", "m3"), series(ts, "t", "m4", "m4")],
            "t",
            "moment",
            early,
        ),
    ];
    for pair in ml_pairs {
        let col = crate::output::ml_column(pair);
        figures.push(figure(
            &format!("ml_lambda_{}", pair.lambda),
            vec![series(ts, "t", &col, &format!("a = {}, lambda = {}", pair.a, pair.lambda))],
            "t",
            "ML moment",
            early,
        ));
    }
    PlotManifest {
        preset: preset.into(),
        figures,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_manifest_has_seven_figures() {
        let files = ReproFiles {
            timeseries: "timeseries.csv",
            snapshots: ["s0.csv", "s1.csv", "s10.csv"],
        };
        let pairs = [MlPair { a: 1.0, lambda: 0.1 }, MlPair { a: 1.0, lambda: 1.0 }];
        let m = repro_manifest("test1", &files, &pairs);
        let ids: Vec<&str> = m.figures.iter().map(|f| f.id.as_str()).collect();
        assert_eq!(
            ids,
            [
                "initial_data",
                "solution_T1",
                "solution_T10",
                "moments_m1_m2",
                "moments_m3_m4",
                "ml_lambda_0.1",
                "ml_lambda_1"
            ]
        );
        assert_eq!(m.figures[5].series[0].y, "ml_a1_l0.1");
        let json = serde_json::to_string(&m).unwrap();
        assert!(json.contains("\"x_range\":[0.0,1.0]"));
    }
}
