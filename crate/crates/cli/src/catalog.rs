use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Spectrum,
    Gap,
    Whs,
    Torsion,
    AnomalySweep,
    Asymptotics,
    Density,
    RelativeFt,
    SignRoot,
}

/// One line of `torsionlab list`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct CatalogEntry {
    pub name: String,
    pub criterion: u32,
    pub description: String,
    pub sections: Vec<String>,
}

fn grid(lo: f64, step: f64, count: usize) -> Vec<f64> {
    (0..count).map(|k| lo + step * k as f64).collect()
}

impl Experiment {
    pub const ALL: [Experiment; 9] = [
        Experiment::Spectrum,
        Experiment::Gap,
        Experiment::Whs,
        Experiment::Torsion,
        Experiment::AnomalySweep,
        Experiment::Asymptotics,
        Experiment::Density,
        Experiment::RelativeFt,
        Experiment::SignRoot,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Spectrum => "spectrum",
            Experiment::Gap => "gap",
            Experiment::Whs => "whs",
            Experiment::Torsion => "torsion",
            Experiment::AnomalySweep => "anomaly-sweep",
            Experiment::Asymptotics => "asymptotics",
            Experiment::Density => "density",
            Experiment::RelativeFt => "relative-ft",
            Experiment::SignRoot => "sign-root",
        }
    }

    /// Number of the acceptance criterion the experiment reproduces.
    pub fn criterion(self) -> u32 {
        match self {
            Experiment::Spectrum | Experiment::Gap => 4,
            Experiment::Whs => 5,
            Experiment::Torsion => 2,
            Experiment::AnomalySweep => 3,
            Experiment::Asymptotics => 6,
            Experiment::Density => 8,
            Experiment::RelativeFt => 9,
            Experiment::SignRoot => 10,
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            Experiment::Spectrum => "eigenvalues of the deformed Laplacians in both degrees, split into small and large",
            Experiment::Gap => "decay of the small eigenvalues and linear growth of the large ones",
            Experiment::Whs => "convergence of the small complex and its torsion to the Morse complex",
            Experiment::Torsion => "S from the small torsion, the large torsion and the Kamber-Tondeur term",
            Experiment::AnomalySweep => "S across perturbations of b, the metric and f",
            Experiment::Asymptotics => "fit of log tau_la against 1, u, log u and S from the constant",
            Experiment::Density => "one-dimensional symbol density on random local symbols",
            Experiment::RelativeFt => "free term of log tau_la,A - log tau_la,B, reflection and ratio tests",
            Experiment::SignRoot => "sign-resolved square root S' for f and -f",
        }
    }

    /// Config sections the experiment reads besides `output`.
    pub fn sections(self) -> &'static [&'static str] {
        match self {
            Experiment::Spectrum | Experiment::Gap | Experiment::Whs | Experiment::Torsion | Experiment::SignRoot => {
                &["model", "grid", "tolerances"]
            }
            Experiment::AnomalySweep => &["model", "grid", "sweep", "tolerances"],
            Experiment::Asymptotics => &["model", "grid", "tolerances"],
            Experiment::Density => &["grid", "density", "tolerances"],
            Experiment::RelativeFt => &["model", "model_b", "grid", "tolerances"],
        }
    }

    pub fn default_grid(self) -> Vec<f64> {
        match self {
            Experiment::Spectrum => vec![5.0, 10.0, 25.0],
            Experiment::Gap | Experiment::Whs => grid(10.0, 5.0, 7),
            Experiment::Torsion | Experiment::AnomalySweep | Experiment::SignRoot => vec![25.0],
            Experiment::Asymptotics => grid(12.0, 3.0, 10),
            Experiment::Density => vec![1.0, 3.5, 12.0],
            Experiment::RelativeFt => grid(12.0, 3.0, 8),
        }
    }

    pub fn min_grid_points(self) -> usize {
        match self {
            Experiment::Gap | Experiment::Whs => 3,
            Experiment::Asymptotics => 8,
            Experiment::RelativeFt => 5,
            _ => 1,
        }
    }

    pub fn entry(self) -> CatalogEntry {
        CatalogEntry {
            name: self.name().into(),
            criterion: self.criterion(),
            description: self.description().into(),
            sections: self.sections().iter().map(|s| s.to_string()).collect(),
        }
    }
}

pub fn catalog() -> Vec<CatalogEntry> {
    Experiment::ALL.iter().map(|e| e.entry()).collect()
}

/// The human listing: one line per experiment.
pub fn render(entries: &[CatalogEntry]) -> String {
    let width = entries.iter().map(|e| e.name.len()).max().unwrap_or(0);
    entries
        .iter()
        .map(|e| format!("{:<width$}  criterion {:>2}  {}  [{}]\n", e.name, e.criterion, e.description, e.sections.join(", ")))
        .collect()
}
