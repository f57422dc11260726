use std::fmt::Write;

use super::units::format_value;
use super::{Circuit, SourceKind};

/// Renders a circuit in the netlist grammar accepted by [`super::parse`].
pub fn serialize(c: &Circuit) -> String {
    let mut out = String::new();
    let ports = &c.ports;
    if !ports.is_empty() {
        out.push_str(".ports");
        if !ports.inputs.is_empty() {
            let _ = write!(out, " in={}", ports.inputs.join(","));
        }
        if !ports.outputs.is_empty() {
            let _ = write!(out, " out={}", ports.outputs.join(","));
        }
        if let Some(vdd) = &ports.vdd {
            let _ = write!(out, " vdd={vdd}");
        }
        out.push('\n');
    }
    for m in &c.mosfets {
        let _ = writeln!(
            out,
            "{} {} {} {} {} {} W={} L={}",
            m.name,
            m.drain,
            m.gate,
            m.source,
            m.bulk,
            m.polarity.keyword(),
            format_value(m.width),
            format_value(m.length)
        );
    }
    for cap in &c.capacitors {
        let _ = writeln!(
            out,
            "{} {} {} {}",
            cap.name,
            cap.positive,
            cap.negative,
            format_value(cap.value)
        );
    }
    for s in &c.sources {
        let value = match &s.kind {
            SourceKind::Dc(v) => format!("DC {}", format_value(*v)),
            SourceKind::Pulse(p) => format!(
                "PULSE({} {} {} {} {} {} {})",
                format_value(p.v_low),
                format_value(p.v_high),
                format_value(p.delay),
                format_value(p.rise),
                format_value(p.fall),
                format_value(p.width),
                format_value(p.period)
            ),
        };
        let _ = writeln!(out, "{} {} {} {}", s.name, s.positive, s.negative, value);
    }
    out.push_str(".end\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::parse;

    #[test]
    fn pulse_has_seven_fields() {
        let c = parse("V1 a 0 PULSE(0 1.8 10n 50p 50p 9.95n 20n)\nC1 a 0 1f").unwrap();
        let text = serialize(&c);
        let line = text.lines().find(|l| l.starts_with("V1")).unwrap();
        let inner = line.split_once('(').unwrap().1.trim_end_matches(')');
        assert_eq!(inner.split_whitespace().count(), 7);
        assert_eq!(parse(&text).unwrap(), c);
    }
}
