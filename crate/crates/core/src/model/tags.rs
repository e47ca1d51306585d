//! Activity-tag enumerations and the scenario taxonomy.
//!
//! Every enumeration serializes to a fixed string (upper-snake for tags,
//! lower-snake for scenario categories) and parses back from exactly that
//! string.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Serialized marker for a matrix cell whose object is unobserved.
pub const ABSENT: &str = "ABSENT";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown {kind} value {value:?}")]
pub struct UnknownTag {
    pub kind: &'static str,
    pub value: String,
}

/// Common surface of the string-backed enumerations.
pub trait TagName: Copy + Eq + fmt::Debug + 'static {
    const KIND: &'static str;
    const ALL: &'static [Self];

    fn as_str(self) -> &'static str;

    fn parse_name(s: &str) -> Result<Self, UnknownTag> {
        Self::ALL
            .iter()
            .copied()
            .find(|v| v.as_str() == s)
            .ok_or_else(|| UnknownTag {
                kind: Self::KIND,
                value: s.to_string(),
            })
    }
}

macro_rules! name_enum {
    (
        $(#[$meta:meta])*
        $name:ident, $kind:literal { $($variant:ident => $text:literal),+ $(,)? }
    ) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub enum $name {
            $($variant),+
        }

        impl TagName for $name {
            const KIND: &'static str = $kind;
            const ALL: &'static [Self] = &[$($name::$variant),+];

            fn as_str(self) -> &'static str {
                match self {
                    $($name::$variant => $text),+
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $name {
            type Err = UnknownTag;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                Self::parse_name(s)
            }
        }

        impl Serialize for $name {
            fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                s.serialize_str(self.as_str())
            }
        }

        impl<'de> Deserialize<'de> for $name {
            fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
                let s = String::deserialize(d)?;
                s.parse().map_err(serde::de::Error::custom)
            }
        }
    };
}

name_enum! {
    /// Longitudinal motion along the agent's path.
    LongitudeTag, "LongitudeTag" {
        Cruising => "CRUISING",
        StandingStill => "STANDING_STILL",
        Accelerating => "ACCELERATING",
        Decelerating => "DECELERATING",
        Reversing => "REVERSING",
    }
}

name_enum! {
    /// Orientation change: lateral shifts and turns.
    LatitudeTag, "LatitudeTag" {
        FacingForward => "FACING_FORWARD",
        VeeringLeft => "VEERING_LEFT",
        VeeringRight => "VEERING_RIGHT",
        TurningLeft => "TURNING_LEFT",
        TurningRight => "TURNING_RIGHT",
    }
}

name_enum! {
    /// Three-level risk used by both the collision and the trajectory-overlap tags.
    /// Variant order is severity order.
    RiskLevel, "RiskLevel" {
        No => "NO",
        Low => "LOW",
        High => "HIGH",
    }
}

pub type CollisionTag = RiskLevel;
pub type TrajOverlapTag = RiskLevel;

name_enum! {
    /// Heading of the guest relative to the ego vehicle.
    HeadingTag, "HeadingTag" {
        Same => "SAME",
        Left => "LEFT",
        Right => "RIGHT",
        Opposite => "OPPOSITE",
    }
}

name_enum! {
    /// Position of the guest in the ego body frame, eight 45° sectors.
    PositionTag, "PositionTag" {
        Front => "FRONT",
        FrontLeft => "FRONT_LEFT",
        Left => "LEFT",
        BackLeft => "BACK_LEFT",
        Back => "BACK",
        BackRight => "BACK_RIGHT",
        Right => "RIGHT",
        FrontRight => "FRONT_RIGHT",
    }
}

name_enum! {
    DistanceTag, "DistanceTag" {
        VeryClose => "VERY_CLOSE",
        Close => "CLOSE",
        Medium => "MEDIUM",
        Far => "FAR",
    }
}

name_enum! {
    /// Scenario taxonomy used for annotations and LLM classification.
    ScenarioCategory, "ScenarioCategory" {
        CutIn => "cut_in",
        LeftOppo => "left_oppo",
        RightPed => "right_ped",
        ObjCross => "obj_cross",
        PedCross => "ped_cross",
        LeadBrake => "lead_brake",
        ApproachStop => "approach_stop",
        NotRelevant => "not_relevant",
        UnknownButRelevant => "unknown_but_relevant",
    }
}

impl ScenarioCategory {
    /// Categories listed to the LLM as known scenario types.
    pub const PROMPT_CATEGORIES: [ScenarioCategory; 4] = [
        ScenarioCategory::CutIn,
        ScenarioCategory::LeftOppo,
        ScenarioCategory::RightPed,
        ScenarioCategory::ObjCross,
    ];

    /// The seven concrete behaviour categories (everything except the two fallbacks).
    pub const BEHAVIOURS: [ScenarioCategory; 7] = [
        ScenarioCategory::CutIn,
        ScenarioCategory::LeftOppo,
        ScenarioCategory::RightPed,
        ScenarioCategory::ObjCross,
        ScenarioCategory::PedCross,
        ScenarioCategory::LeadBrake,
        ScenarioCategory::ApproachStop,
    ];

    pub fn is_prompt_category(self) -> bool {
        Self::PROMPT_CATEGORIES.contains(&self)
    }

    /// Everything other than `not_relevant` counts as a braking-relevant scenario.
    pub fn is_relevant(self) -> bool {
        self != ScenarioCategory::NotRelevant
    }
}

/// Formats an optional cell, `None` rendering as [`ABSENT`].
pub fn cell_to_str<T: TagName>(cell: Option<T>) -> &'static str {
    cell.map_or(ABSENT, T::as_str)
}

pub fn cell_from_str<T: TagName>(s: &str) -> Result<Option<T>, UnknownTag> {
    if s == ABSENT {
        Ok(None)
    } else {
        T::parse_name(s).map(Some)
    }
}
