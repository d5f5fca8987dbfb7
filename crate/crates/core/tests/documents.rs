use kmsgraph::graph::parse_graph;
use kmsgraph::{Error, FinitePath};

fn err(text: &str) -> Error {
    parse_graph(text, true).unwrap_err()
}

#[test]
fn schema_failures() {
    assert!(matches!(err("[]"), Error::Schema { .. }));
    assert!(matches!(err(r#"{"kind":"weird"}"#), Error::Schema { .. }));
    assert!(matches!(err(r#"{"kind":"explicit","vertices":["a","a"],"arrows":[]}"#), Error::Schema { .. }));
    assert!(matches!(
        err(r#"{"kind":"explicit","vertices":["a"],"arrows":[{"src":"a","dst":"a","mult":1}]}"#),
        Error::Schema { .. }
    ));
}

#[test]
fn dangling_zero_and_sink() {
    assert!(matches!(
        err(r#"{"kind":"explicit","vertices":["a"],"arrows":[{"src":"a","dst":"b","mult":1,"F":1}]}"#),
        Error::DanglingEndpoint(_)
    ));
    assert!(matches!(
        err(r#"{"kind":"explicit","vertices":["a"],"arrows":[{"src":"a","dst":"a","mult":0,"F":1}]}"#),
        Error::ZeroMultiplicity { .. }
    ));
    let sink = r#"{"kind":"explicit","vertices":["a","b"],"arrows":[{"src":"a","dst":"b","mult":1,"F":1}]}"#;
    assert!(matches!(err(sink), Error::Sink(_)));
    assert!(parse_graph(sink, false).is_ok());
}

#[test]
fn families_by_document() {
    let p = parse_graph(r#"{"kind":"family","name":"pascal"}"#, true).unwrap();
    let g = p.materialize(5).unwrap();
    assert_eq!(g.len(), (1..=6).sum::<usize>());
    assert!(matches!(parse_graph(r#"{"kind":"family","name":"nope"}"#, false), Err(Error::Schema { .. })));
}

#[test]
fn paths_must_compose() {
    let text = r#"{"kind":"explicit","vertices":["a","b"],"arrows":[
        {"src":"a","dst":"b","mult":2,"F":0.5},{"src":"b","dst":"a","mult":1,"F":1.5}]}"#;
    let g = parse_graph(text, true).unwrap().materialize(0).unwrap();
    let ab = FinitePath::through_names(&g, &["a", "b"]).unwrap();
    let ba = FinitePath::through_names(&g, &["b", "a"]).unwrap();
    assert_eq!(ab.concat(&ba).unwrap().potential(), 2.0);
    assert!(matches!(ab.concat(&ab), Err(Error::NonComposable(_))));
    assert!(matches!(FinitePath::through_names(&g, &["a", "a"]), Err(Error::NonComposable(_))));
}
