use chrono::{Duration, NaiveDate};
use pex_core::gradebook::{
    parse_log, parse_log_bytes, render_detail, render_table, score, summary_line, LogAppender,
    LogRecord, LogTimestamp, ScoreRow, ScoreRules,
};

const FRED_LISTING: &str = "\
25

log count =  10

Sun Apr  4 19:39:45 EDT 2010 fred You have 1 out of 3 parts correct.
Fri Apr  9 22:58:24 EDT 2010 fred You have 2 out of 3 parts correct.
Fri Apr  9 23:19:39 EDT 2010 fred You have 2 out of 3 parts correct.
Fri Apr  9 23:26:14 EDT 2010 fred You have 2 out of 3 parts correct.
Fri Apr  9 23:32:49 EDT 2010 fred You have 2 out of 3 parts correct.
Sat Apr 10 00:20:24 EDT 2010 fred You have 2 out of 3 parts correct.
Sat Apr 10 00:31:49 EDT 2010 fred You have 2 out of 3 parts correct.
Sat Apr 10 00:38:52 EDT 2010 fred You have 2 out of 3 parts correct.
Sat Apr 10 11:33:25 EDT 2010 fred You have 2 out of 3 parts correct.
Sat Apr 10 18:37:42 EDT 2010 fred You have 3 out of 3 parts correct.
";

const TABLE: &str = "\
fred  25 25 25 25
alice 25  5 25 15
bob   25  0 25 25
sam   25 25 10 25
tony  25  0 25  0
phil   0  0 25 25
harry 25 15 25 25
nancy 25  0 25 25
";

/// Attempt histories (parts correct out of 5) that land on each table value.
fn history(target: u32) -> Vec<u32> {
    match target {
        25 => vec![1, 4, 5],
        15 => vec![0, 3],
        10 => vec![2],
        5 => vec![0, 0, 0, 0],
        0 => vec![0],
        other => panic!("no history for {other}"),
    }
}

#[test]
fn eight_user_table_from_synthetic_logs() {
    let dir = tempfile::tempdir().unwrap();
    let appender = LogAppender::new(dir.path()).unwrap();
    let exercises = ["ex1", "ex2", "ex3", "ex4"];
    let mut users = Vec::new();
    let start = NaiveDate::from_ymd_opt(2010, 4, 4)
        .unwrap()
        .and_hms_opt(9, 0, 0)
        .unwrap();
    let mut tick = 0;
    for line in TABLE.lines() {
        let mut cols = line.split_whitespace();
        let user = cols.next().unwrap();
        users.push(user.to_string());
        for (ex, target) in exercises
            .iter()
            .zip(cols.map(|c| c.parse::<u32>().unwrap()))
        {
            for correct in history(target) {
                tick += 1;
                let at = LogTimestamp::new(start + Duration::minutes(tick * 7), "EDT").unwrap();
                let record = LogRecord::new(at, user, summary_line(correct as usize, 5)).unwrap();
                appender.append(ex, &record).unwrap();
            }
        }
    }

    let rules = ScoreRules::default();
    let per_exercise: Vec<_> = exercises
        .iter()
        .map(|ex| {
            let parsed = parse_log(dir.path().join(format!("{ex}.log"))).unwrap();
            assert!(parsed.rejected.is_empty());
            score(&parsed.records, &rules)
        })
        .collect();
    let rows: Vec<ScoreRow> = users
        .iter()
        .map(|u| ScoreRow {
            user_id: u.clone(),
            scores: per_exercise
                .iter()
                .map(|s| s.get(u).copied().unwrap_or(0))
                .collect(),
        })
        .collect();
    assert_eq!(render_table(&rows), TABLE);
}

#[test]
fn fred_detail_listing() {
    let log: String = FRED_LISTING
        .lines()
        .skip(4)
        .map(|l| format!("{l}\n"))
        .collect();
    let parsed = parse_log_bytes(log.as_bytes());
    assert!(parsed.rejected.is_empty());
    assert_eq!(parsed.records.len(), 10);
    let scores = score(&parsed.records, &ScoreRules::default());
    assert_eq!(scores["fred"], 25);
    let refs: Vec<&LogRecord> = parsed.records.iter().collect();
    assert_eq!(render_detail(scores["fred"], &refs), FRED_LISTING);
}

#[test]
fn corrupted_line_is_reported_with_its_number() {
    let mut lines: Vec<String> = FRED_LISTING.lines().skip(4).map(String::from).collect();
    lines[3].replace_range(0..3, "Xyz");
    let parsed = parse_log_bytes(lines.join("\n").as_bytes());
    assert_eq!(parsed.records.len(), 9);
    assert_eq!(parsed.rejected.len(), 1);
    assert_eq!(parsed.rejected[0].line_number, 4);
}
