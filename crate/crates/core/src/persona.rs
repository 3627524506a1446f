//! Role-playing personas and the registry they live in.

use serde::{Deserialize, Serialize};

/// A role-playing agent: a role name plus the description bullets that
/// condition generation toward that viewpoint.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PersonaSpec {
    pub persona_id: String,
    pub role_name: String,
    /// Rendered as "- bullet" lines in the reasoning prompt. May be empty
    /// only when the role-description ablation is active.
    #[serde(default)]
    pub description_bullets: Vec<String>,
}

/// Ordered persona set for a run. Order is significant: chain enumeration
/// and report rows follow it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PersonaRegistry {
    pub personas: Vec<PersonaSpec>,
}

impl PersonaRegistry {
    pub fn new(personas: Vec<PersonaSpec>) -> Self {
        PersonaRegistry { personas }
    }

    /// The stock three-role registry covering the ideological spectrum the
    /// pipeline ships with. Replaceable via a personas file.
    pub fn default_political() -> Self {
        let mk = |id: &str, role: &str, bullets: &[&str]| PersonaSpec {
            persona_id: id.to_string(),
            role_name: role.to_string(),
            description_bullets: bullets.iter().map(|s| s.to_string()).collect(),
        };
        PersonaRegistry::new(vec![
            mk(
                "democrat",
                "Democrat",
                &[
                    "Favors expanded social programs, environmental regulation, and government action on inequality.",
                    "Emphasizes protections for workers, minorities, and voting access, and is wary of concentrated corporate power.",
                    "Tends to frame issues around fairness, care for vulnerable groups, and institutional reform.",
                ],
            ),
            mk(
                "moderate",
                "Moderate",
                &[
                    "Rejects positions seen as extreme on either side and prefers incremental, pragmatic policy.",
                    "Weighs arguments from both major parties and often lands on compromise framings.",
                    "Tends to downplay partisan rhetoric and emphasize stability and common ground.",
                ],
            ),
            mk(
                "republican",
                "Republican",
                &[
                    "Favors lower taxes, limited government regulation, and a strong national defense.",
                    "Emphasizes individual responsibility, traditional institutions, and skepticism of federal expansion.",
                    "Tends to frame issues around liberty, order, and respect for established authority.",
                ],
            ),
        ])
    }

    pub fn len(&self) -> usize {
        self.personas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.personas.is_empty()
    }

    pub fn get(&self, persona_id: &str) -> Option<&PersonaSpec> {
        self.personas.iter().find(|p| p.persona_id == persona_id)
    }

    pub fn ids(&self) -> Vec<String> {
        self.personas.iter().map(|p| p.persona_id.clone()).collect()
    }

    /// Registry-level problems: duplicate ids and empty bullet lists.
    /// `allow_empty_bullets` suppresses the bullet check for ablation runs.
    pub fn validate(&self, allow_empty_bullets: bool) -> Vec<String> {
        let mut problems = Vec::new();
        for (i, p) in self.personas.iter().enumerate() {
            if self.personas[..i].iter().any(|q| q.persona_id == p.persona_id) {
                problems.push(format!("duplicate persona_id {:?}", p.persona_id));
            }
            if p.description_bullets.is_empty() && !allow_empty_bullets {
                problems.push(format!("persona {:?} has no description bullets", p.persona_id));
            }
        }
        problems
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_registry_is_valid() {
        let reg = PersonaRegistry::default_political();
        assert_eq!(reg.len(), 3);
        assert!(reg.validate(false).is_empty());
    }

    #[test]
    fn duplicate_ids_flagged() {
        let p = PersonaSpec {
            persona_id: "x".into(),
            role_name: "X".into(),
            description_bullets: vec!["b".into()],
        };
        let reg = PersonaRegistry::new(vec![p.clone(), p]);
        assert_eq!(reg.validate(false).len(), 1);
    }
}
