use super::detector::{apply_detector, DetectorModel};
use super::elements::{apply_beamsplitter, apply_loss, apply_qfc_stage, QfcStage};
use super::source::{simulate_pair_source, PairSourceModel};
use super::{check_non_negative, check_unit, SeedTree, SimError};
use crate::spd::db_to_transmission;
use crate::timetag::{EventSet, EventStream};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LayoutKind {
    /// Signal and idler each on one detector.
    Pair,
    /// Idler heralds; signal split onto two detectors.
    Hsps,
    /// As `Hsps` with the frequency converter in the signal arm before the splitter.
    HspsQfc,
}

impl LayoutKind {
    /// Channel names in channel-id order.
    pub fn channel_names(self) -> &'static [&'static str] {
        match self {
            LayoutKind::Pair => &["signal", "idler"],
            LayoutKind::Hsps | LayoutKind::HspsQfc => &["idler", "s1", "s2"],
        }
    }
}

/// One experiment: source, arm losses, optional converter and detectors.
///
/// `detectors[i]` serves channel `i` of [`LayoutKind::channel_names`]. The
/// `qfc` stage is only used by `HspsQfc`, so one layout can be rerun as
/// `Hsps` for a paired comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentLayout {
    pub kind: LayoutKind,
    pub source: PairSourceModel,
    pub signal_loss_db: f64,
    pub idler_loss_db: f64,
    pub splitter_ratio: f64,
    pub qfc: Option<QfcStage>,
    pub detectors: Vec<DetectorModel>,
}

impl ExperimentLayout {
    pub fn validate(&self) -> Result<(), SimError> {
        self.source.validate()?;
        check_non_negative("signal_loss_db", self.signal_loss_db)?;
        check_non_negative("idler_loss_db", self.idler_loss_db)?;
        check_unit("splitter_ratio", self.splitter_ratio)?;
        let names = self.kind.channel_names();
        if self.detectors.len() != names.len() {
            return Err(SimError::InvalidLayout(format!(
                "{:?} needs {} detectors ({}), got {}",
                self.kind,
                names.len(),
                names.join(", "),
                self.detectors.len()
            )));
        }
        for d in &self.detectors {
            d.validate()?;
        }
        match (self.kind, &self.qfc) {
            (LayoutKind::HspsQfc, None) => {
                Err(SimError::InvalidLayout("HspsQfc layout has no qfc stage".into()))
            }
            (_, Some(q)) => q.validate(),
            _ => Ok(()),
        }
    }

    pub fn with_kind(&self, kind: LayoutKind) -> Self {
        Self { kind, ..self.clone() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationRun {
    pub kind: LayoutKind,
    pub events: EventSet,
}

impl SimulationRun {
    pub fn stream(&self, name: &str) -> Option<&EventStream> {
        let id = self.kind.channel_names().iter().position(|&n| n == name)?;
        self.events.channel(id as u8)
    }
}

pub fn run_experiment(layout: &ExperimentLayout, seed: u64) -> Result<SimulationRun, SimError> {
    layout.validate()?;
    let seeds = SeedTree::new(seed);
    let duration_ps = layout.source.duration_ps();
    let pairs = simulate_pair_source(&layout.source, &mut seeds.rng("source"))?;

    let idler = apply_loss(&pairs, db_to_transmission(layout.idler_loss_db), &mut seeds.rng("idler_loss"))?;
    let mut signal =
        apply_loss(&pairs, db_to_transmission(layout.signal_loss_db), &mut seeds.rng("signal_loss"))?;
    drop(pairs);

    let names = layout.kind.channel_names();
    let photons: Vec<Vec<u64>> = match layout.kind {
        LayoutKind::Pair => vec![signal, idler],
        LayoutKind::Hsps | LayoutKind::HspsQfc => {
            if layout.kind == LayoutKind::HspsQfc {
                let stage = layout.qfc.as_ref().expect("validated");
                signal = apply_qfc_stage(&signal, stage, duration_ps, &mut seeds.rng("qfc"))?;
            }
            let (s1, s2) = apply_beamsplitter(&signal, layout.splitter_ratio, &mut seeds.rng("splitter"))?;
            vec![idler, s1, s2]
        }
    };

    let streams = photons
        .iter()
        .zip(&layout.detectors)
        .zip(names)
        .enumerate()
        .map(|(ch, ((p, det), name))| {
            apply_detector(p, det, ch as u8, duration_ps, &mut seeds.rng(&format!("detector_{name}")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SimulationRun {
        kind: layout.kind,
        events: EventSet::new(1, duration_ps, streams)?,
    })
}
