//! Prompt templates and rendering.
//!
//! Templates are plain text with `{placeholder}` substitution points and
//! `{{`/`}}` escapes for literal braces. The six templates shipped under
//! `prompts/` are compiled in as the defaults; callers may load edited
//! copies from disk instead.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum PromptName {
    SpeakerId,
    IssueVote,
    TopicDiscovery,
    TopicUnify,
    TopicClassify,
    Stance,
}

impl PromptName {
    pub const ALL: [PromptName; 6] = [
        PromptName::SpeakerId,
        PromptName::IssueVote,
        PromptName::TopicDiscovery,
        PromptName::TopicUnify,
        PromptName::TopicClassify,
        PromptName::Stance,
    ];

    pub fn file_stem(self) -> &'static str {
        match self {
            PromptName::SpeakerId => "speaker_id",
            PromptName::IssueVote => "issue_vote",
            PromptName::TopicDiscovery => "topic_discovery",
            PromptName::TopicUnify => "topic_unify",
            PromptName::TopicClassify => "topic_classify",
            PromptName::Stance => "stance",
        }
    }
}

impl fmt::Display for PromptName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.file_stem())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptTemplate {
    pub name: PromptName,
    pub body: String,
}

impl PromptTemplate {
    /// The template compiled into the library.
    pub fn builtin(name: PromptName) -> Self {
        let body = match name {
            PromptName::SpeakerId => include_str!("../../../../prompts/speaker_id.txt"),
            PromptName::IssueVote => include_str!("../../../../prompts/issue_vote.txt"),
            PromptName::TopicDiscovery => include_str!("../../../../prompts/topic_discovery.txt"),
            PromptName::TopicUnify => include_str!("../../../../prompts/topic_unify.txt"),
            PromptName::TopicClassify => include_str!("../../../../prompts/topic_classify.txt"),
            PromptName::Stance => include_str!("../../../../prompts/stance.txt"),
        };
        PromptTemplate { name, body: body.to_string() }
    }

    /// Loads `<dir>/<stem>.txt` for the given template.
    pub fn from_dir(dir: &Path, name: PromptName) -> Result<Self, PromptError> {
        let path = dir.join(format!("{}.txt", name.file_stem()));
        let body = fs::read_to_string(&path)
            .map_err(|e| PromptError::Io { path: path.display().to_string(), message: e.to_string() })?;
        Ok(PromptTemplate { name, body })
    }

    /// Placeholder names appearing in the body, in order of first appearance.
    pub fn placeholders(&self) -> Vec<String> {
        let mut names = Vec::new();
        scan(&self.body, |name, _| {
            if !names.iter().any(|n| n == name) {
                names.push(name.to_string());
            }
        });
        names
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PromptError {
    #[error("failed to read template {path}: {message}")]
    Io { path: String, message: String },
    #[error("no value supplied for placeholder `{0}`")]
    MissingValue(String),
    #[error("unbalanced brace at byte offset {0}")]
    UnbalancedBrace(usize),
    #[error("placeholder at byte offset {0} is empty or not an identifier")]
    BadPlaceholder(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RenderedPrompt {
    pub text: String,
    /// Context keys that matched no placeholder in the template.
    pub unused_keys: Vec<String>,
}

fn is_placeholder_ident(s: &str) -> bool {
    !s.is_empty()
        && s.chars().next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
        && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn scan(body: &str, mut on_placeholder: impl FnMut(&str, usize)) {
    let bytes = body.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        match bytes[i] {
            b'{' if bytes.get(i + 1) == Some(&b'{') => i += 2,
            b'}' if bytes.get(i + 1) == Some(&b'}') => i += 2,
            b'{' => {
                if let Some(close) = body[i + 1..].find('}') {
                    let name = &body[i + 1..i + 1 + close];
                    if is_placeholder_ident(name) {
                        on_placeholder(name, i);
                    }
                    i += close + 2;
                } else {
                    i += 1;
                }
            }
            _ => i += 1,
        }
    }
}

/// Byte-exact substitution of every `{placeholder}` from `context`.
///
/// Missing values are an error; context keys that never appear in the
/// template are returned as warnings.
pub fn render_prompt(
    template: &PromptTemplate,
    context: &BTreeMap<String, String>,
) -> Result<RenderedPrompt, PromptError> {
    let body = &template.body;
    let bytes = body.as_bytes();
    let mut out = String::with_capacity(body.len());
    let mut used: Vec<&str> = Vec::new();
    let mut i = 0;

    while i < bytes.len() {
        match bytes[i] {
            b'{' if bytes.get(i + 1) == Some(&b'{') => {
                out.push('{');
                i += 2;
            }
            b'}' if bytes.get(i + 1) == Some(&b'}') => {
                out.push('}');
                i += 2;
            }
            b'{' => {
                let close = body[i + 1..].find('}').ok_or(PromptError::UnbalancedBrace(i))?;
                let name = &body[i + 1..i + 1 + close];
                if !is_placeholder_ident(name) {
                    return Err(PromptError::BadPlaceholder(i));
                }
                let value =
                    context.get(name).ok_or_else(|| PromptError::MissingValue(name.to_string()))?;
                out.push_str(value);
                if !used.contains(&name) {
                    used.push(name);
                }
                i += close + 2;
            }
            b'}' => return Err(PromptError::UnbalancedBrace(i)),
            _ => {
                // Copy the full UTF-8 character, not just one byte.
                let ch = body[i..].chars().next().unwrap();
                out.push(ch);
                i += ch.len_utf8();
            }
        }
    }

    let unused_keys =
        context.keys().filter(|k| !used.contains(&k.as_str())).cloned().collect();
    Ok(RenderedPrompt { text: out, unused_keys })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(pairs: &[(&str, &str)]) -> BTreeMap<String, String> {
        pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
    }

    #[test]
    fn substitutes_and_reports_unused() {
        let t = PromptTemplate { name: PromptName::Stance, body: "a {x} b {x} {y}".into() };
        let r = render_prompt(&t, &ctx(&[("x", "1"), ("y", "2"), ("z", "3")])).unwrap();
        assert_eq!(r.text, "a 1 b 1 2");
        assert_eq!(r.unused_keys, vec!["z".to_string()]);
    }

    #[test]
    fn missing_value_is_an_error() {
        let t = PromptTemplate { name: PromptName::Stance, body: "{issue}".into() };
        assert_eq!(
            render_prompt(&t, &ctx(&[])),
            Err(PromptError::MissingValue("issue".into()))
        );
    }

    #[test]
    fn escaped_braces_render_literally() {
        let t = PromptTemplate {
            name: PromptName::SpeakerId,
            body: "{{SPEAKER_06: 0.70}} and {v}".into(),
        };
        let r = render_prompt(&t, &ctx(&[("v", "ok")])).unwrap();
        assert_eq!(r.text, "{SPEAKER_06: 0.70} and ok");
    }

    #[test]
    fn speaker_template_renders_n_total() {
        let t = PromptTemplate::builtin(PromptName::SpeakerId);
        let r = render_prompt(
            &t,
            &ctx(&[
                ("n_speakers", "2"),
                ("speaker_list", "SPEAKER_00\nSPEAKER_01"),
                ("transcript", "SPEAKER_00 (00:00:00 - 00:00:05): hello"),
            ]),
        )
        .unwrap();
        assert!(r.text.contains("2 total"));
        assert!(r.text.contains("Here is the full transcript"));
        assert!(!r.text.contains("{n_speakers}"));
        assert!(r.text.contains("{SPEAKER_06: 0.70, SPEAKER_00: 0.30}"));
    }

    #[test]
    fn stance_template_embeds_issue_and_summary() {
        let t = PromptTemplate::builtin(PromptName::Stance);
        let r = render_prompt(
            &t,
            &ctx(&[
                ("issue", "1075 Pomeroy Avenue Rezoning"),
                ("summary", "Rezone 1075 Pomeroy Ave from R3-18D to PD for 5 homes"),
                ("input_dictionary", "{}"),
            ]),
        )
        .unwrap();
        assert!(r.text.contains("Issue title: 1075 Pomeroy Avenue Rezoning"));
        assert!(r.text.contains("Issue summary: Rezone 1075 Pomeroy Ave from R3-18D to PD for 5 homes"));
    }

    #[test]
    fn builtin_templates_have_expected_placeholders() {
        let cases: Vec<(PromptName, Vec<&str>)> = vec![
            (PromptName::SpeakerId, vec!["n_speakers", "speaker_list", "transcript"]),
            (PromptName::IssueVote, vec!["transcript"]),
            (PromptName::TopicDiscovery, vec!["issue_dict"]),
            (PromptName::TopicUnify, vec!["n_chunks", "topic_chunks"]),
            (PromptName::TopicClassify, vec!["topics_json", "issue_summaries"]),
            (PromptName::Stance, vec!["issue", "summary", "input_dictionary"]),
        ];
        for (name, expected) in cases {
            let t = PromptTemplate::builtin(name);
            assert_eq!(t.placeholders(), expected, "placeholders for {name}");
        }
    }
}
