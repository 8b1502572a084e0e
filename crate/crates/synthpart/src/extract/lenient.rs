//! Markdown heuristics for prose replies.
//!
//! Scope of the heuristics: numbered/bulleted entries with role and name
//! lines, bold/heading detection, `Weight:`/`Final Weight:` lines, and
//! `$NN million` money extraction normalized to million CAD.

use std::collections::HashMap;
use std::sync::OnceLock;

use regex::Regex;

use super::schema::{EvaluationV1, ScoreCell, ScoreRow};
use super::{
    slug, ConstraintKind, DelphiOutcome, DesignAlternative, ExtractError, Objective,
    PerformanceMetric, PlanPhase, PlanningConstraint, StakeholderAvatar,
};

fn re(pattern: &'static str, cell: &'static OnceLock<Regex>) -> &'static Regex {
    cell.get_or_init(|| Regex::new(pattern).expect("static regex"))
}

macro_rules! regex {
    ($pattern:literal) => {{
        static CELL: OnceLock<Regex> = OnceLock::new();
        re($pattern, &CELL)
    }};
}

/// Strip markdown emphasis, heading markers and surrounding whitespace.
fn strip_md(line: &str) -> String {
    let mut s = line.trim();
    while let Some(rest) = s.strip_prefix('#') {
        s = rest;
    }
    s.replace("**", "").replace("__", "").trim().to_string()
}

/// Strip a leading list marker (`-`, `*`, `•`, `1.`, `1)`) from a line.
fn strip_bullet(line: &str) -> String {
    let trimmed = line.trim_start();
    let unbulleted = regex!(r"^(?:[-*•]\s+|\d+[.)]\s+)").replace(trimmed, "");
    unbulleted.into_owned()
}

fn clean_item(line: &str) -> String {
    strip_md(&strip_bullet(line))
}

/// Drop a trailing parenthetical such as "(0-10)".
fn strip_trailing_paren(name: &str) -> String {
    regex!(r"\s*\([^)]*\)\s*$")
        .replace(name.trim(), "")
        .into_owned()
}

fn split_comma_list(text: &str) -> Vec<String> {
    text.split(',')
        .map(strip_md)
        .filter(|part| !part.is_empty())
        .collect()
}

// ---------------------------------------------------------------------------
// Avatars
// ---------------------------------------------------------------------------

/// Numbered entries of the form `1. Role Title: Person Name` followed by
/// indented or bulleted detail lines that become the profile. When no numbered
/// entries exist, falls back to blank-line separated blocks carrying explicit
/// `Name:` and `Role:` lines.
pub fn avatars(reply: &str) -> Result<Vec<StakeholderAvatar>, ExtractError> {
    let entry_re = regex!(r"^\s*\d+[.)]\s+(.+?):\s+(.+)$");
    let mut avatars: Vec<StakeholderAvatar> = Vec::new();
    let mut profile_lines: Vec<String> = Vec::new();
    let mut collecting = false;

    let flush = |avatars: &mut Vec<StakeholderAvatar>, profile_lines: &mut Vec<String>| {
        if let Some(last) = avatars.last_mut() {
            let profile = profile_lines.join(" ");
            if !profile.is_empty() {
                last.profile = profile;
            } else if last.profile.is_empty() {
                last.profile = last.raw_role.clone();
            }
        }
        profile_lines.clear();
    };

    for line in reply.lines() {
        if let Some(caps) = entry_re.captures(line) {
            let role = strip_md(&caps[1]);
            let name = strip_md(&caps[2]);
            if role.is_empty() || name.is_empty() {
                continue;
            }
            flush(&mut avatars, &mut profile_lines);
            avatars.push(StakeholderAvatar {
                name,
                raw_role: role,
                category: None,
                profile: String::new(),
            });
            collecting = true;
        } else if collecting {
            let is_detail = line.trim_start().starts_with(['-', '*', '•'])
                || (line.starts_with("  ") && !line.trim().is_empty());
            if is_detail {
                profile_lines.push(clean_item(line));
            } else if !line.trim().is_empty() {
                // plain paragraph ends the entry list
                collecting = false;
            }
        }
    }
    flush(&mut avatars, &mut profile_lines);

    if !avatars.is_empty() {
        return Ok(avatars);
    }
    avatars_from_blocks(reply)
}

fn avatars_from_blocks(reply: &str) -> Result<Vec<StakeholderAvatar>, ExtractError> {
    let mut avatars = Vec::new();
    for block in reply.split("\n\n") {
        let mut name = None;
        let mut role = None;
        let mut rest = Vec::new();
        for line in block.lines() {
            let cleaned = clean_item(line);
            if let Some(v) = cleaned.strip_prefix("Name:") {
                name = Some(v.trim().to_string());
            } else if let Some(v) = cleaned.strip_prefix("Role:") {
                role = Some(v.trim().to_string());
            } else if !cleaned.is_empty() {
                rest.push(cleaned);
            }
        }
        if let (Some(name), Some(role)) = (name, role) {
            if !name.is_empty() {
                let profile = if rest.is_empty() {
                    role.clone()
                } else {
                    rest.join(" ")
                };
                avatars.push(StakeholderAvatar {
                    name,
                    raw_role: role,
                    category: None,
                    profile,
                });
            }
        }
    }
    if avatars.is_empty() {
        return Err(ExtractError::NoParsableContent {
            step: "avatars",
            detail: "no numbered entries and no Name:/Role: blocks".into(),
        });
    }
    Ok(avatars)
}

// ---------------------------------------------------------------------------
// Delphi outcome
// ---------------------------------------------------------------------------

/// Find the first line starting with one of `keys` (case-insensitive,
/// optionally followed by a parenthetical) and return the comma list after
/// the colon. Keys are tried in priority order across the whole reply.
fn find_list_line(reply: &str, keys: &[&str]) -> Option<Vec<String>> {
    for key in keys {
        let pattern = format!(r"(?i)^{}\s*(?:\([^)]*\))?\s*:\s*(.+)$", regex::escape(key));
        let key_re = Regex::new(&pattern).expect("escaped key pattern");
        for line in reply.lines() {
            let cleaned = clean_item(line);
            if let Some(caps) = key_re.captures(&cleaned) {
                let items = split_comma_list(&caps[1]);
                if !items.is_empty() {
                    return Some(items);
                }
            }
        }
    }
    None
}

pub fn delphi(reply: &str) -> Result<DelphiOutcome, ExtractError> {
    let issues =
        find_list_line(reply, &["key issues", "identified issues", "issues"]).unwrap_or_default();
    let objective_names = find_list_line(
        reply,
        &["key objectives", "proposed objectives", "objectives"],
    );

    let weight_line = regex!(r"^(.+?):\s*([01](?:\.\d+)?)\s*$");
    let metrics_line = regex!(r"(?i)^(?:performance\s+)?metrics(?:\s+unchanged)?\s*:\s*(.+)$");
    let heading_stop = regex!(
        r"(?i)^(method|results|round|synthesized|key |decision weights|performance metrics|identified|proposed)"
    );

    // first pass: bind Weight / Final Weight and Metrics lines to the nearest
    // preceding heading-like line
    let mut heading: Option<String> = None;
    let mut weights_by_heading: HashMap<String, (f64, bool)> = HashMap::new();
    let mut metrics_by_heading: HashMap<String, Vec<String>> = HashMap::new();
    let mut heading_order: Vec<String> = Vec::new();
    let mut in_decision_weights = false;
    let mut decision_weights: Vec<(String, f64)> = Vec::new();

    for line in reply.lines() {
        let cleaned = clean_item(line);
        if cleaned.is_empty() {
            continue;
        }
        let lower = cleaned.to_lowercase();
        if lower.starts_with("decision weights") {
            in_decision_weights = true;
            continue;
        }
        if in_decision_weights {
            if let Some(caps) = weight_line.captures(&cleaned) {
                let name = strip_trailing_paren(&caps[1]);
                if let Ok(value) = caps[2].parse::<f64>() {
                    decision_weights.push((name, value));
                    continue;
                }
            }
            in_decision_weights = false;
        }
        if let Some(caps) = metrics_line.captures(&cleaned) {
            if let Some(h) = &heading {
                let names: Vec<String> = split_comma_list(&caps[1])
                    .into_iter()
                    .map(|n| strip_trailing_paren(&n))
                    .collect();
                if !names.is_empty() {
                    metrics_by_heading.insert(h.clone(), names);
                }
            }
            continue;
        }
        if let Some(rest) = lower
            .strip_prefix("final weight")
            .or_else(|| lower.strip_prefix("weight"))
        {
            let is_final = lower.starts_with("final");
            if let Some(value) = regex!(r"([01](?:\.\d+)?)").find(rest) {
                if let (Some(h), Ok(value)) = (&heading, value.as_str().parse::<f64>()) {
                    let entry = weights_by_heading
                        .entry(h.clone())
                        .or_insert((value, is_final));
                    if is_final || !entry.1 {
                        *entry = (value, is_final || entry.1);
                    }
                }
                continue;
            }
        }
        // heading candidate: short line, no sentence punctuation at the end,
        // not one of the structural keywords
        let headingish = cleaned.trim_end_matches(':');
        if !heading_stop.is_match(headingish)
            && headingish.len() >= 3
            && headingish.len() <= 80
            && !headingish.ends_with('.')
            && !headingish.contains(". ")
        {
            let name = strip_trailing_paren(headingish);
            if !heading_order.iter().any(|h| h == &name) {
                heading_order.push(name.clone());
            }
            heading = Some(name);
        }
    }

    // objective order: the explicit list when present, else decision-weight
    // order, else heading order filtered to headings that carried weights
    let names: Vec<String> = if let Some(names) = objective_names {
        names
    } else if !decision_weights.is_empty() {
        decision_weights.iter().map(|(n, _)| n.clone()).collect()
    } else {
        heading_order
            .iter()
            .filter(|h| weights_by_heading.contains_key(*h))
            .cloned()
            .collect()
    };
    if names.is_empty() {
        return Err(ExtractError::NoParsableContent {
            step: "delphi",
            detail: "no objectives found".into(),
        });
    }

    let weight_for = |name: &str| -> Option<f64> {
        let key = slug(name);
        decision_weights
            .iter()
            .find(|(n, _)| slug(n) == key)
            .map(|(_, w)| *w)
            .or_else(|| {
                weights_by_heading
                    .iter()
                    .find(|(h, _)| slug(h) == key)
                    .map(|(_, (w, _))| *w)
            })
    };

    // canonical metric casing from a standalone "Performance Metrics" list
    let canonical_metrics = standalone_metric_list(reply);

    let mut objectives = Vec::new();
    let mut metrics = Vec::new();
    let mut used_metric_ids: Vec<String> = Vec::new();
    for name in names {
        let weight = weight_for(&name).ok_or_else(|| ExtractError::NoParsableContent {
            step: "delphi",
            detail: format!("objective '{name}' has no weight"),
        })?;
        let objective_id = slug(&name);
        let metric_names = metrics_by_heading
            .iter()
            .find(|(h, _)| slug(h) == objective_id)
            .map(|(_, v)| v.clone())
            .unwrap_or_default();
        let mut metric_ids = Vec::new();
        for metric_name in metric_names {
            let display = canonical_metrics
                .get(&slug(&metric_name))
                .cloned()
                .unwrap_or(metric_name);
            let mut id = slug(&display);
            let mut suffix = 2;
            while used_metric_ids.contains(&id) {
                id = format!("{}-{suffix}", slug(&display));
                suffix += 1;
            }
            used_metric_ids.push(id.clone());
            metric_ids.push(id.clone());
            metrics.push(PerformanceMetric::new(id, display, objective_id.clone()));
        }
        objectives.push(Objective {
            id: objective_id,
            name,
            weight,
            metric_ids,
        });
    }

    Ok(DelphiOutcome {
        issues,
        constraints: constraints(reply),
        objectives,
        metrics,
    })
}

fn standalone_metric_list(reply: &str) -> HashMap<String, String> {
    let mut out = HashMap::new();
    let mut in_list = false;
    for line in reply.lines() {
        let cleaned = clean_item(line);
        let lower = cleaned.to_lowercase();
        if lower.starts_with("performance metrics") && !lower.contains(',') {
            in_list = true;
            continue;
        }
        if in_list {
            if cleaned.is_empty() || lower.starts_with("decision weights") {
                in_list = false;
                continue;
            }
            if line.trim_start().starts_with(['-', '*', '•'])
                || regex!(r"^\s*\d+[.)]").is_match(line)
            {
                let name = strip_trailing_paren(&cleaned);
                if !name.is_empty() && !name.contains(':') {
                    out.insert(slug(&name), name);
                }
            } else {
                in_list = false;
            }
        }
    }
    out
}

fn constraints(reply: &str) -> Vec<PlanningConstraint> {
    let mut out = Vec::new();
    let constraint_re = regex!(r"(?i)^(hard|soft)\s+constraints?\s*:\s*(.+)$");
    for line in reply.lines() {
        let cleaned = clean_item(line);
        if let Some(caps) = constraint_re.captures(&cleaned) {
            let kind = if caps[1].eq_ignore_ascii_case("hard") {
                ConstraintKind::Hard
            } else {
                ConstraintKind::Soft
            };
            for text in caps[2].split(';') {
                let text = text.trim();
                if !text.is_empty() {
                    out.push(PlanningConstraint {
                        kind,
                        text: text.to_string(),
                    });
                }
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Alternatives
// ---------------------------------------------------------------------------

fn money_m_cad(text: &str) -> Option<f64> {
    let caps = regex!(r"\$\s*([0-9]+(?:\.[0-9]+)?)\s*(?:million|M\b)").captures(text)?;
    caps[1].parse().ok()
}

fn year_range(text: &str) -> Option<(i32, i32)> {
    let caps = regex!(r"(\d{4})\s*[-–—]\s*(\d{4})").captures(text)?;
    Some((caps[1].parse().ok()?, caps[2].parse().ok()?))
}

pub fn alternatives(reply: &str) -> Result<Vec<DesignAlternative>, ExtractError> {
    let header_a = regex!(r"(?i)^\s*#*\s*\**\s*Alternative\s+\d+\s*[:.\-–]\s*(.+?)[*\s]*$");
    let header_b = regex!(r"(?i)^\s*#*\s*\**\s*(.+?)\s*[-–]\s*Alternative\s+\d+[*\s]*$");

    let mut alternatives: Vec<DesignAlternative> = Vec::new();
    let mut in_specs = false;
    for line in reply.lines() {
        let name = header_a
            .captures(line)
            .or_else(|| header_b.captures(line))
            .map(|caps| strip_md(&caps[1]));
        if let Some(name) = name {
            alternatives.push(DesignAlternative {
                id: slug(&name),
                name,
                description: String::new(),
                specifications: vec![],
                plan: vec![],
            });
            in_specs = false;
            continue;
        }
        let Some(current) = alternatives.last_mut() else {
            continue;
        };
        let cleaned = clean_item(line);
        let lower = cleaned.to_lowercase();
        if lower.starts_with("specifications") {
            in_specs = true;
            if let Some((_, tail)) = cleaned.split_once(':') {
                for spec in split_numbered_specs(tail) {
                    current.specifications.push(spec);
                }
            }
            continue;
        }
        if lower.contains("implementation plan") {
            in_specs = false;
            continue;
        }
        if let (Some((start, end)), Some(cost)) = (year_range(&cleaned), money_m_cad(&cleaned)) {
            in_specs = false;
            current.plan.push(PlanPhase {
                start_year: start,
                end_year: end,
                cost_m_cad: cost,
                activities: cleaned,
            });
            continue;
        }
        let is_bullet = line.trim_start().starts_with(['-', '*', '•']);
        if in_specs && is_bullet && !cleaned.is_empty() {
            current.specifications.push(cleaned);
        } else if !is_bullet
            && !cleaned.is_empty()
            && current.plan.is_empty()
            && current.specifications.is_empty()
            && !lower.starts_with("20-year")
            && current.description.len() < 400
        {
            if !current.description.is_empty() {
                current.description.push(' ');
            }
            current.description.push_str(&cleaned);
        }
    }

    if alternatives.is_empty() {
        return Err(ExtractError::NoParsableContent {
            step: "alternatives",
            detail: "no 'Alternative N:' headers".into(),
        });
    }
    Ok(alternatives)
}

/// Inline specifications such as "(1) A, (2) B, and (3) C".
fn split_numbered_specs(text: &str) -> Vec<String> {
    let parts: Vec<String> = regex!(r"\(\d+\)")
        .split(text)
        .map(strip_md)
        .filter(|p| !p.is_empty())
        .map(|p| {
            p.trim_start_matches(|c: char| c == ',' || c.is_whitespace())
                .to_string()
        })
        .filter(|p| !p.is_empty())
        .collect();
    parts
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

pub fn evaluation(
    reply: &str,
    metrics: &[PerformanceMetric],
    alternatives: &[DesignAlternative],
) -> Result<EvaluationV1, ExtractError> {
    let alt_index_re = regex!(r"(?i)alternative\s+(\d+)");
    let score_line = regex!(r"^(.+):\s*([0-9]+(?:\.[0-9]+)?)\s*$");
    let eq_total = regex!(r"=\s*([0-9]+(?:\.[0-9]+)?)\s*$");
    let total_of = regex!(r"(?i)total\s+of\s+([0-9]+(?:\.[0-9]+)?)");

    let metric_slugs: HashMap<String, usize> = metrics
        .iter()
        .enumerate()
        .map(|(i, m)| (m.id.clone(), i))
        .collect();

    let mut cells: Vec<HashMap<usize, f64>> = vec![HashMap::new(); alternatives.len()];
    let mut reported: Vec<Option<f64>> = vec![None; alternatives.len()];
    let mut current: Option<usize> = None;
    let mut recommendation: Option<String> = None;

    for line in reply.lines() {
        let cleaned = clean_item(line);
        if cleaned.is_empty() {
            continue;
        }
        let lower = cleaned.to_lowercase();
        // track the alternative a line refers to
        let mentioned = alt_index_re
            .captures(&cleaned)
            .and_then(|caps| caps[1].parse::<usize>().ok())
            .and_then(|n| n.checked_sub(1))
            .filter(|n| *n < alternatives.len())
            .or_else(|| {
                alternatives
                    .iter()
                    .position(|a| lower.contains(&a.name.to_lowercase()))
            });
        if let Some(index) = mentioned {
            current = Some(index);
        }
        if lower.contains("recommend") || lower.contains("scores the highest") {
            if let Some(index) = mentioned.or(current) {
                recommendation = Some(alternatives[index].id.clone());
            }
        }
        let Some(alt) = current else { continue };
        if lower.contains("total") {
            if let Some(caps) = eq_total
                .captures(&cleaned)
                .or_else(|| total_of.captures(&cleaned))
            {
                if let Ok(value) = caps[1].parse::<f64>() {
                    reported[alt] = Some(value);
                }
            }
            continue;
        }
        if let Some(caps) = score_line.captures(&cleaned) {
            // split on the last colon so parentheticals with colons survive
            let name = strip_trailing_paren(&caps[1]);
            if let Some(&metric_index) = metric_slugs.get(&slug(&name)) {
                if let Ok(value) = caps[2].parse::<f64>() {
                    cells[alt].insert(metric_index, value);
                }
            }
        }
    }

    let scores: Vec<ScoreRow> = alternatives
        .iter()
        .enumerate()
        .filter(|(i, _)| !cells[*i].is_empty() || reported[*i].is_some())
        .map(|(i, alternative)| {
            let mut row: Vec<ScoreCell> = cells[i]
                .iter()
                .map(|(&metric_index, &score)| ScoreCell {
                    metric_id: metrics[metric_index].id.clone(),
                    score,
                })
                .collect();
            row.sort_by_key(|c| metric_slugs[&c.metric_id]);
            ScoreRow {
                alternative_id: alternative.id.clone(),
                cells: row,
                reported_total: reported[i],
            }
        })
        .collect();
    if scores.is_empty() {
        return Err(ExtractError::NoParsableContent {
            step: "evaluation",
            detail: "no score lines matched known metrics".into(),
        });
    }
    Ok(EvaluationV1 {
        scores,
        recommendation,
    })
}
