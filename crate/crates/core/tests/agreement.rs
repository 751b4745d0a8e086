use umlsat_core::analysis::{analyze, AnalysisError, Backend};
use umlsat_core::corpus::{random_corpus, CorpusBounds};
use umlsat_core::oracle::SearchBound;
use umlsat_core::owl::{emit, EmitOptions};
use umlsat_core::reasoner::ReasonerConfig;

#[test]
fn tableau_and_bounded_search_agree_on_random_models() {
    let count: usize = std::env::var("UMLSAT_CORPUS").ok().and_then(|v| v.parse().ok()).unwrap_or(60);
    let mut failures = Vec::new();
    for (k, (text, model)) in random_corpus(11, count, &CorpusBounds::default()).into_iter().enumerate() {
        let ax = emit(&model, EmitOptions::default()).unwrap();
        if let Err(e @ AnalysisError::Disagreement(_)) = analyze(&ax, Backend::Both, &SearchBound::default(), &ReasonerConfig::default()) {
            failures.push(format!("model {k}: {e}\n{text}"));
        }
    }
    assert!(failures.is_empty(), "{}", failures.join("\n----\n"));
}
