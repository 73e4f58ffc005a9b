//! Reader for strict-order-complete (SOC) preference files.
//!
//! Two layouts are accepted. The current one has `#`-prefixed metadata
//! (`# NUMBER ALTERNATIVES: m`, `# ALTERNATIVE NAME i: name`) followed by
//! `count: c1,c2,...` lines. The legacy one starts with the candidate count,
//! then `i,name` lines, a `voters,sum,unique` line and `count,c1,c2,...` lines.
//! Candidate ids are 1-based in both.

use std::path::Path;

use cud_core::{Candidate, Candidates, Preference};

use crate::ExperimentError;

/// Distinct strict orders with their multiplicities.
#[derive(Debug, Clone, PartialEq)]
pub struct SocData {
    pub candidates: Candidates,
    pub orders: Vec<(Preference, u32)>,
}

impl SocData {
    pub fn voters(&self) -> u64 {
        self.orders.iter().map(|(_, k)| *k as u64).sum()
    }
}

pub fn parse_soc_file(path: &Path) -> Result<SocData, ExperimentError> {
    let text = std::fs::read_to_string(path).map_err(|e| ExperimentError::io(path, e))?;
    parse_soc(&text)
}

fn err(line: usize, message: impl Into<String>) -> ExperimentError {
    ExperimentError::Soc {
        line,
        message: message.into(),
    }
}

pub fn parse_soc(text: &str) -> Result<SocData, ExperimentError> {
    let first = text
        .lines()
        .map(str::trim)
        .find(|l| !l.is_empty())
        .ok_or_else(|| err(1, "empty file"))?;
    if first.starts_with('#') {
        parse_current(text)
    } else {
        parse_legacy(text)
    }
}

fn parse_current(text: &str) -> Result<SocData, ExperimentError> {
    let mut m: Option<usize> = None;
    let mut names: Vec<Option<String>> = Vec::new();
    let mut body: Vec<(usize, &str)> = Vec::new();
    for (ix, raw) in text.lines().enumerate() {
        let line_no = ix + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(meta) = line.strip_prefix('#') {
            if !body.is_empty() {
                return Err(err(line_no, "metadata after preference lines"));
            }
            let Some((key, value)) = meta.split_once(':') else {
                continue;
            };
            let key = key.trim();
            let value = value.trim();
            if key == "NUMBER ALTERNATIVES" {
                let count = value
                    .parse::<usize>()
                    .map_err(|_| err(line_no, format!("bad alternative count {value:?}")))?;
                m = Some(count);
                names.resize(count, None);
            } else if let Some(id) = key.strip_prefix("ALTERNATIVE NAME ") {
                let count =
                    m.ok_or_else(|| err(line_no, "alternative name before NUMBER ALTERNATIVES"))?;
                let id = parse_id(id.trim(), count, line_no)?;
                names[id] = Some(value.to_string());
            }
            continue;
        }
        body.push((line_no, line));
    }
    let m = m.ok_or_else(|| err(1, "missing '# NUMBER ALTERNATIVES' header"))?;
    let names = names
        .into_iter()
        .enumerate()
        .map(|(i, n)| n.unwrap_or_else(|| (i + 1).to_string()))
        .collect::<Vec<_>>();
    let orders = body
        .into_iter()
        .map(|(line_no, line)| {
            let (count, order) = line
                .split_once(':')
                .ok_or_else(|| err(line_no, "expected 'count: c1,c2,...'"))?;
            parse_order_line(count, order, m, line_no)
        })
        .collect::<Result<Vec<_>, _>>()?;
    finish(names, orders)
}

fn parse_legacy(text: &str) -> Result<SocData, ExperimentError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    let (line_no, head) = lines.next().ok_or_else(|| err(1, "empty file"))?;
    let m: usize = head
        .parse()
        .map_err(|_| err(line_no, format!("bad alternative count {head:?}")))?;
    let mut names = vec![String::new(); m];
    for _ in 0..m {
        let (line_no, line) = lines
            .next()
            .ok_or_else(|| err(line_no, "missing alternative names"))?;
        let (id, name) = line
            .split_once(',')
            .ok_or_else(|| err(line_no, "expected 'id,name'"))?;
        let id = parse_id(id.trim(), m, line_no)?;
        names[id] = name.trim().to_string();
    }
    let (line_no, totals) = lines
        .next()
        .ok_or_else(|| err(line_no, "missing voter totals"))?;
    if totals.split(',').count() != 3 {
        return Err(err(line_no, "expected 'voters,sum,unique'"));
    }
    let orders = lines
        .map(|(line_no, line)| {
            let (count, order) = line
                .split_once(',')
                .ok_or_else(|| err(line_no, "expected 'count,c1,c2,...'"))?;
            parse_order_line(count, order, m, line_no)
        })
        .collect::<Result<Vec<_>, _>>()?;
    finish(names, orders)
}

fn parse_id(raw: &str, m: usize, line: usize) -> Result<usize, ExperimentError> {
    match raw.parse::<usize>() {
        Ok(id) if (1..=m).contains(&id) => Ok(id - 1),
        _ => Err(err(line, format!("alternative id {raw:?} not in 1..={m}"))),
    }
}

fn parse_order_line(
    count: &str,
    order: &str,
    m: usize,
    line: usize,
) -> Result<(Preference, u32), ExperimentError> {
    let count: u32 = count
        .trim()
        .parse()
        .map_err(|_| err(line, format!("bad multiplicity {:?}", count.trim())))?;
    if order.contains('{') || order.contains('}') {
        return Err(err(line, "ties are not allowed in a strict order"));
    }
    let ids = order
        .split(',')
        .map(|s| parse_id(s.trim(), m, line))
        .collect::<Result<Vec<_>, _>>()?;
    if ids.len() != m {
        return Err(err(
            line,
            format!("order ranks {} of {m} alternatives", ids.len()),
        ));
    }
    let pref = Preference::new(ids.into_iter().map(Candidate::from).collect(), m)
        .map_err(|e| err(line, e.to_string()))?;
    Ok((pref, count))
}

fn finish(names: Vec<String>, orders: Vec<(Preference, u32)>) -> Result<SocData, ExperimentError> {
    if orders.is_empty() {
        return Err(err(0, "no preference lines"));
    }
    Ok(SocData {
        candidates: Candidates::new(names)?,
        orders,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const CURRENT: &str = "\
# FILE NAME: toy.soc
# DATA TYPE: soc
# NUMBER ALTERNATIVES: 3
# ALTERNATIVE NAME 1: red
# ALTERNATIVE NAME 2: green
# ALTERNATIVE NAME 3: blue
2: 1,2,3
1: 3,1,2
";

    #[test]
    fn current_format() {
        let soc = parse_soc(CURRENT).unwrap();
        assert_eq!(soc.candidates.names(), ["red", "green", "blue"]);
        assert_eq!(soc.voters(), 3);
        assert_eq!(soc.orders[0].1, 2);
        assert_eq!(
            soc.orders[0].0,
            Preference::from_indices(&[0, 1, 2]).unwrap()
        );
        assert_eq!(soc.orders[1].0.top(), Candidate(2));
    }

    #[test]
    fn legacy_format() {
        let soc = parse_soc("3\n1,red\n2,green\n3,blue\n3,3,2\n2,1,2,3\n1,3,1,2\n").unwrap();
        assert_eq!(soc, parse_soc(CURRENT).unwrap());
    }

    #[test]
    fn rejects_ties_and_partial_orders() {
        let tied = CURRENT.replace("1: 3,1,2", "1: 3,{1,2}");
        match parse_soc(&tied) {
            Err(ExperimentError::Soc { line: 8, .. }) => {}
            other => panic!("{other:?}"),
        }
        let partial = CURRENT.replace("2: 1,2,3", "2: 1,2");
        match parse_soc(&partial) {
            Err(ExperimentError::Soc { line: 7, .. }) => {}
            other => panic!("{other:?}"),
        }
        let repeated = CURRENT.replace("2: 1,2,3", "2: 1,1,3");
        assert!(matches!(
            parse_soc(&repeated),
            Err(ExperimentError::Soc { line: 7, .. })
        ));
        let out_of_range = CURRENT.replace("2: 1,2,3", "2: 1,2,4");
        assert!(matches!(
            parse_soc(&out_of_range),
            Err(ExperimentError::Soc { line: 7, .. })
        ));
        assert!(parse_soc("# nothing\n").is_err());
    }
}
