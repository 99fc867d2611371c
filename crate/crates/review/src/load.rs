//! Assembling a review session from artifact directories.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use tcsdet_core::io::{read_annotations, read_detections, read_recording, AnnotationSet, Detection, DetectionLog};
use tcsdet_core::pipeline::{list_recordings, ANNOTATIONS_FILE};

use crate::report::{RecordingReview, ReviewSet};
use crate::server::RecordingSource;
use crate::ReviewError;

/// Detection ids written by the experiment carry a `{recording}:` prefix;
/// the review set adds its own, so it is removed here.
fn local_ids(log: &DetectionLog, recording_id: &str) -> Result<DetectionLog, ReviewError> {
    let prefix = format!("{recording_id}:");
    let detections: Vec<Detection> = log
        .detections()
        .iter()
        .map(|d| Detection {
            id: d.id.strip_prefix(&prefix).unwrap_or(&d.id).to_string(),
            ..d.clone()
        })
        .collect();
    Ok(DetectionLog::new(detections)?.with_recording_id(recording_id))
}

/// Pairs every `*.json` detection log in `detections` with its recording in
/// `dataset`. Recordings without a log are reviewed with no detections.
pub fn load_review_set(dataset: &Path, detections: &Path) -> Result<(ReviewSet, RecordingSource), ReviewError> {
    let mut dirs: BTreeMap<String, PathBuf> = BTreeMap::new();
    let mut recordings: BTreeMap<String, RecordingReview> = BTreeMap::new();
    let dataset_dirs = list_recordings(dataset).map_err(|e| ReviewError::Malformed(e.to_string()))?;
    for dir in dataset_dirs {
        let rec = read_recording(&dir)?;
        let ann = dir.join(ANNOTATIONS_FILE);
        let truth = if ann.is_file() { read_annotations(&ann)? } else { AnnotationSet::empty() };
        let id = rec.id().to_string();
        recordings.insert(
            id.clone(),
            RecordingReview {
                recording_id: id.clone(),
                hours: rec.duration_s() / 3600.0,
                truth,
                detections: DetectionLog::empty().with_recording_id(&id),
            },
        );
        dirs.insert(id, dir);
    }
    let mut files: Vec<PathBuf> = fs::read_dir(detections)
        .map_err(|e| ReviewError::fs(detections, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    for path in files {
        let log = read_detections(&path)?;
        let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        let id = log.recording_id().map(String::from).unwrap_or(stem);
        let entry = recordings
            .get_mut(&id)
            .ok_or_else(|| ReviewError::UnknownRecording(id.clone()))?;
        entry.detections = local_ids(&log, &id)?;
    }
    let set = ReviewSet::new(recordings.into_values().collect())?;
    Ok((set, RecordingSource::dirs(dirs)))
}
