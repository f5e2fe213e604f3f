//! Attendance from transcripts: a roster member who neither speaks nor
//! answers the roll call is absent, unless so many are absent that the
//! hearing looks like a special meeting.

use std::collections::HashSet;
use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::engagement::RollCall;
use crate::error::Result;
use crate::transcript::Hearing;

pub const DEFAULT_SPECIAL_MEETING_FRACTION: f64 = 0.6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AttendanceStatus {
    Present,
    Absent,
    NotAssessedSpecialMeeting,
}

impl fmt::Display for AttendanceStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AttendanceStatus::Present => "present",
            AttendanceStatus::Absent => "absent",
            AttendanceStatus::NotAssessedSpecialMeeting => "not-assessed-special-meeting",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttendanceRecord {
    pub hearing_id: String,
    pub legislator_id: String,
    pub status: AttendanceStatus,
}

/// One record per roster member, in roster id order.
pub fn detect_absences(hearing: &Hearing, roll_call: Option<&RollCall>) -> Vec<AttendanceRecord> {
    let speakers: HashSet<&str> = hearing
        .utterances
        .iter()
        .map(|u| u.speaker.as_str())
        .collect();
    hearing
        .committee_roster
        .iter()
        .map(|id| {
            let voted = roll_call.is_some_and(|rc| rc.votes.contains(id));
            let status = if speakers.contains(id.as_str()) || voted {
                AttendanceStatus::Present
            } else {
                AttendanceStatus::Absent
            };
            AttendanceRecord {
                hearing_id: hearing.id.clone(),
                legislator_id: id.clone(),
                status,
            }
        })
        .collect()
}

/// When more than `fraction` of the roster is absent, nobody is marked
/// absent for this hearing.
pub fn apply_special_meeting_rule(
    mut records: Vec<AttendanceRecord>,
    fraction: f64,
) -> Vec<AttendanceRecord> {
    if records.is_empty() {
        return records;
    }
    let absent = records
        .iter()
        .filter(|r| r.status == AttendanceStatus::Absent)
        .count();
    if absent as f64 / records.len() as f64 > fraction {
        for r in &mut records {
            if r.status == AttendanceStatus::Absent {
                r.status = AttendanceStatus::NotAssessedSpecialMeeting;
            }
        }
    }
    records
}

pub fn write_attendance_csv<W: Write>(records: &[AttendanceRecord], sink: W) -> Result<()> {
    let mut writer = csv::Writer::from_writer(sink);
    writer.write_record(["hearing_id", "legislator_id", "status"])?;
    for r in records {
        writer.write_record([&r.hearing_id, &r.legislator_id, &r.status.to_string()])?;
    }
    writer.flush()?;
    Ok(())
}
