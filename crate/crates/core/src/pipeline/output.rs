use super::{SegmentDecision, TriggerEvent};

#[derive(serde::Serialize)]
struct TriggerRecord<'a> {
    segment_id: &'a str,
    trigger_time_ms: f64,
    rolling_mean: f64,
}

/// One JSON object per line: `segment_id`, `trigger_time_ms`, `rolling_mean`.
pub fn trigger_ndjson(events: &[TriggerEvent]) -> String {
    let mut out = String::new();
    for e in events {
        let rec = TriggerRecord {
            segment_id: &e.segment_id,
            trigger_time_ms: e.trigger_time_ms,
            rolling_mean: e.rolling_mean,
        };
        out.push_str(&serde_json::to_string(&rec).expect("record serializes"));
        out.push('\n');
    }
    out
}

/// Per-frame decisions as CSV.
pub fn offline_csv(decisions: &[SegmentDecision]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["segment_id", "frame_index", "decision_value", "prediction"])
        .expect("in-memory write");
    for d in decisions {
        for s in &d.frame_scores {
            w.write_record([
                d.segment_id.clone(),
                s.frame_index.to_string(),
                format!("{:?}", s.decision_value),
                s.prediction().to_string(),
            ])
            .expect("in-memory write");
        }
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
}

/// One row per segment: decided label, trigger frame and highest rolling
/// vote mean (empty when absent).
pub fn segment_csv(decisions: &[SegmentDecision]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["segment_id", "decided_label", "trigger_frame", "max_rolling_mean"])
        .expect("in-memory write");
    for d in decisions {
        w.write_record([
            d.segment_id.clone(),
            d.decided_label.to_string(),
            d.trigger_frame.map(|f| f.to_string()).unwrap_or_default(),
            d.max_rolling_mean.map(|m| format!("{m:?}")).unwrap_or_default(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
}
