mod support;

use rand::rngs::StdRng;
use rand::SeedableRng;

use synthgraph_core::relext::{
    rule_m_o, rule_o_m, rule_o_o, rule_p_o, rule_po_om, Ablation, BracketChain, PredictedRelation, RuleConfig,
    RuleContext,
};
use synthgraph_core::Abbreviations;

use support::{random_doc, Edge};

fn ids(preds: Vec<PredictedRelation>) -> Vec<Edge> {
    let mut v: Vec<Edge> = preds.into_iter().map(|p| (p.relation.from, p.relation.to)).collect();
    v.sort();
    v
}

fn sorted(mut v: Vec<Edge>) -> Vec<Edge> {
    v.sort();
    v
}

fn configs() -> Vec<RuleConfig> {
    let mut out = Vec::new();
    for ab in [Ablation::Full, Ablation::NoMaterialSublabels, Ablation::NoPropertySublabels, Ablation::NoSublabels] {
        for chain in [BracketChain::Link, BracketChain::Skip, BracketChain::Inline] {
            for po_hosts in [true, false] {
                let mut c = RuleConfig::preset(ab);
                c.bracket_chain = chain;
                c.bracketed_po_hosts = po_hosts;
                out.push(c);
            }
        }
    }
    out
}

#[test]
fn rules_match_exhaustive_scan() {
    let abbrevs = Abbreviations::default();
    let mut rng = StdRng::seed_from_u64(0x5eed);
    let configs = configs();
    for n in 0..600 {
        let doc = random_doc(&mut rng, 30, 8);
        let ctx = RuleContext::new(&doc.text, &doc.entities, &abbrevs).unwrap();
        let cfg = &configs[n % configs.len()];
        let mut sink = Vec::new();
        let ctx_msg = || format!("doc {n}: {:?}\nentities {:?}\nconfig {cfg:?}", doc.text, doc.entities);
        assert_eq!(ids(rule_o_o(&ctx, cfg)), sorted(doc.oracle_o_o(cfg)), "O-O {}", ctx_msg());
        assert_eq!(ids(rule_m_o(&ctx, cfg, &mut sink)), sorted(doc.oracle_m_o(cfg)), "M-O {}", ctx_msg());
        assert_eq!(ids(rule_o_m(&ctx, cfg)), sorted(doc.oracle_o_m(cfg)), "O-M {}", ctx_msg());
        assert_eq!(ids(rule_po_om(&ctx, cfg, &mut sink)), sorted(doc.oracle_po_om(cfg)), "Po-OM {}", ctx_msg());
        assert_eq!(ids(rule_p_o(&ctx, cfg, &mut sink)), sorted(doc.oracle_p_o(cfg)), "P-O {}", ctx_msg());
    }
}

#[test]
fn generator_structure_matches_tokenizer() {
    let abbrevs = Abbreviations::default();
    let mut rng = StdRng::seed_from_u64(7);
    for _ in 0..300 {
        let doc = random_doc(&mut rng, 30, 8);
        let a = synthgraph_core::textprep::analyze(&doc.text, &abbrevs);
        assert_eq!(a.tokens.len(), doc.tokens.len(), "{}", doc.text);
        let sentences: Vec<usize> = a.tokens.iter().map(|t| t.sentence_index).collect();
        assert_eq!(sentences, doc.sentence, "{}", doc.text);
        let mut pairs = a.bracket_pairs.clone();
        let mut want = doc.pairs.clone();
        pairs.sort();
        want.sort();
        assert_eq!(pairs, want, "{}", doc.text);
    }
}
