"""Pipeline subcommands: extract, features, score-heuristic, train, predict,
eval, eval-glossary, stats, export, compact, serve.

Configuration lives in a flat JSON file; command-line flags override it.
The MASRAD_STORE environment variable may supply the store root. Every
subcommand writes a manifest (input digests + config digest + versions) so
runs can be traced, and all outputs go through write-then-rename.

Exit codes: 0 ok, 1 usage, 2 data error, 3 provider failure.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import hashlib
import json
import logging
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__, candgen, evaluation, features, heuristic, model
from .extract import ExtractConfig, ParenIssue, corpus_stats, extract_occurrences, load_documents
from .providers import ProviderUnavailable, provider_set_from_config
from .termstore import (
    PROVENANCE_DRAFT,
    PROVENANCE_EXPERT,
    ScoreRecord,
    Store,
    build_termbase,
    export_termbase,
)
from .textnorm import MATCHING_PROFILE, NormalizationProfile

log = logging.getLogger("termalign")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit(2); usage errors are exit 1
        raise UsageError(message)


@dataclass
class RunConfig:
    store_root: str = ""
    providers: dict = field(default_factory=lambda: {
        "embedder": "builtin", "translator": "builtin", "transliterator": "builtin",
        "ner": "builtin", "pos": "builtin",
    })
    alpha: int = 2
    beta: int = 5
    clitic_variants: bool = False
    max_window: int = 12
    normalization: dict = field(default_factory=lambda: MATCHING_PROFILE.to_dict())
    seed: int = model.DEFAULT_SEED
    threads: int | None = None
    ner_on_context: bool = True
    base_dir: str = "."

    @property
    def profile(self) -> NormalizationProfile:
        return NormalizationProfile.from_dict(self.normalization)

    def to_dict(self) -> dict:
        return {
            "store": self.store_root,
            "providers": dict(self.providers),
            "candgen": {"alpha": self.alpha, "beta": self.beta,
                        "clitic_variants": self.clitic_variants},
            "extract": {"max_window": self.max_window},
            "normalization": dict(self.normalization),
            "seed": self.seed,
            "threads": self.threads,
            "ner_on_context": self.ner_on_context,
        }


def load_config(path: str | None, args) -> RunConfig:
    cfg = RunConfig()
    if path:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
        cfg.base_dir = str(Path(path).parent)
        cfg.store_root = doc.get("store", cfg.store_root)
        cfg.providers.update(doc.get("providers", {}))
        cand = doc.get("candgen", {})
        cfg.alpha = cand.get("alpha", cfg.alpha)
        cfg.beta = cand.get("beta", cfg.beta)
        cfg.clitic_variants = cand.get("clitic_variants", cfg.clitic_variants)
        cfg.max_window = doc.get("extract", {}).get("max_window", cfg.max_window)
        cfg.normalization.update(doc.get("normalization", {}))
        cfg.seed = doc.get("seed", cfg.seed)
        cfg.threads = doc.get("threads", cfg.threads)
        cfg.ner_on_context = doc.get("ner_on_context", cfg.ner_on_context)
    if os.environ.get("MASRAD_STORE") and not cfg.store_root:
        cfg.store_root = os.environ["MASRAD_STORE"]
    if getattr(args, "store", None):
        cfg.store_root = args.store
    if getattr(args, "seed", None) is not None:
        cfg.seed = args.seed
    if getattr(args, "threads", None) is not None:
        cfg.threads = args.threads
    if not cfg.store_root:
        raise UsageError("no store root: pass --store, set MASRAD_STORE, "
                         "or put \"store\" in the config file")
    return cfg


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def _atomic_write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    tmp.replace(path)


def write_manifest(store: Store, command: str, cfg: RunConfig, inputs: list[Path]) -> None:
    def key(p: Path) -> str:
        # store-internal inputs are recorded relative to the store root so
        # reruns in a different root stay byte-identical
        try:
            return str(p.resolve().relative_to(store.root.resolve()))
        except ValueError:
            return str(p)

    config = dict(cfg.to_dict())
    config.pop("store", None)
    manifest = {
        "command": command,
        "version": __version__,
        "schema_version": model.SCHEMA_VERSION,
        "config_digest": hashlib.sha256(
            json.dumps(config, sort_keys=True).encode()).hexdigest(),
        "inputs": {key(p): _sha256(p) for p in sorted(inputs) if p.exists()},
    }
    _atomic_write_text(store.root / "manifests" / f"{command}.json",
                       json.dumps(manifest, indent=2, sort_keys=True) + "\n")


# --- subcommands ---------------------------------------------------------------


def cmd_extract(args, cfg: RunConfig) -> int:
    store = Store(cfg.store_root)
    docs = load_documents(args.input_dir)
    if not docs:
        log.error("no .txt documents under %s", args.input_dir)
        return 2
    issues: list[ParenIssue] = []
    ecfg = ExtractConfig(max_window=cfg.max_window)
    ccfg = candgen.CandGenConfig(alpha=cfg.alpha, beta=cfg.beta,
                                 emit_variants=cfg.clitic_variants,
                                 profile=cfg.profile)
    occurrences = []
    candidates = []
    for doc in docs:
        occs = extract_occurrences(doc, ecfg, issues)
        occurrences.extend(occs)
        for occ in occs:
            candidates.extend(candgen.candidates_for_occurrence(occ, ccfg))
    for issue in issues:
        log.warning("unbalanced parenthesis (%s) in %s at %d",
                    issue.kind, issue.doc_id, issue.position)
    store.save_occurrences(occurrences)
    store.save_candidates(candidates)
    write_manifest(store, "extract", cfg, [Path(d.source_path) for d in docs if d.source_path])
    print(f"extracted {len(occurrences)} occurrences, {len(candidates)} candidates "
          f"from {len(docs)} documents ({len(issues)} paren issues)")
    return 0


def cmd_features(args, cfg: RunConfig) -> int:
    store = Store(cfg.store_root)
    occurrences = store.load_occurrences()
    candidates = store.load_candidates()
    providers = provider_set_from_config(cfg.providers, cfg.base_dir)
    by_occ: dict[str, list] = {}
    for cand in candidates:
        by_occ.setdefault(cand.occurrence_id, []).append(cand)
    occ_by_id = {o.occurrence_id: o for o in occurrences}
    label_view = store.label_view()

    def run(occ_id):
        occ = occ_by_id[occ_id]
        return features.compute_occurrence_features(
            occ, by_occ[occ_id], providers, cfg.ner_on_context, cfg.profile)

    occ_ids = [o.occurrence_id for o in occurrences if o.occurrence_id in by_occ]
    workers = cfg.threads or os.cpu_count() or 1
    if workers > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as pool:
            groups = list(pool.map(run, occ_ids))
    else:
        groups = [run(i) for i in occ_ids]
    vectors = []
    for group in groups:
        for v in group:
            rec = label_view.get(v.candidate_id)
            if rec is not None:
                v = features.FeatureVector(**{**v.__dict__, "label": rec.label})
            vectors.append(v)
    store.save_features(vectors)
    features.write_features_jsonl(vectors, store.root / "features.jsonl")
    write_manifest(store, "features", cfg,
                   [store.occurrences_path, store.candidates_path])
    print(f"computed {len(vectors)} feature vectors over {len(occ_ids)} occurrences")
    return 0


def cmd_score_heuristic(args, cfg: RunConfig) -> int:
    store = Store(cfg.store_root)
    vectors = store.load_features()
    by_occ: dict[str, list] = {}
    for v in vectors:
        by_occ.setdefault(v.occurrence_id, []).append(v)
    records = []
    drafts = 0
    for occ_id in sorted(by_occ):
        scores = heuristic.score_occurrence(by_occ[occ_id])
        winner = heuristic.select_by_heuristic(scores)
        for s in scores:
            records.append(ScoreRecord(
                candidate_id=s.candidate_id, occurrence_id=occ_id,
                score=s.total, selected=s.candidate_id == winner, scorer="heuristic",
                components={"s_l": s.s_l, "s_s": s.s_s, "s_e": s.s_e,
                            "s_p": s.s_p, "s_pos": s.s_pos},
            ))
        current = store.current_true(occ_id)
        if current is None or (current.provenance == PROVENANCE_DRAFT
                               and current.candidate_id != winner):
            appended = store.append_annotation(
                winner, True, PROVENANCE_DRAFT, reviewer="pipeline",
                occurrence_id=occ_id)
            drafts += 1 if appended else 0
    store.save_scores(records)
    write_manifest(store, "score-heuristic", cfg, [store.features_path])
    print(f"scored {len(records)} candidates in {len(by_occ)} occurrences; "
          f"wrote {drafts} draft labels")
    return 0


def _labeled_instances(store: Store):
    """Encoded instances with labels overlaid from the annotation view.

    A candidate gets True iff it is the occurrence's current-true candidate;
    other candidates of occurrences that have a true label get False.
    Occurrences with no label at all are left out.
    """
    vectors = store.load_features()
    view = store.label_view()
    true_by_occ = {}
    for rec in view.values():
        if rec.label and rec.custom_arabic_term is None:
            true_by_occ[rec.occurrence_id] = rec.candidate_id
    instances = []
    for v in vectors:
        if v.occurrence_id not in true_by_occ:
            continue
        label = v.candidate_id == true_by_occ[v.occurrence_id]
        instances.append(model.encode(
            features.FeatureVector(**{**v.__dict__, "label": label})))
    return instances


def cmd_train(args, cfg: RunConfig) -> int:
    store = Store(cfg.store_root)
    instances = _labeled_instances(store)
    if args.train_books:
        train_books = set(args.train_books.split(","))
        test_books = set(args.test_books.split(",")) if args.test_books else set()
        split = evaluation.book_split(instances, train_books, test_books)
        train_set = split.train
    else:
        train_set = instances
    forest = model.train_forest(train_set, model.ForestParams(
        n_trees=args.trees, seed=cfg.seed))
    out = Path(args.out) if args.out else store.model_path
    model.save_forest(forest, out)
    write_manifest(store, "train", cfg, [store.features_path, store.annotations_path])
    print(f"trained forest: {forest.n_trees} trees on {len(train_set)} instances; "
          f"train_accuracy={forest.train_report['train_accuracy']:.4f} "
          f"oob_accuracy={forest.train_report['oob_accuracy']}")
    print(f"model written to {out}")
    return 0


def cmd_predict(args, cfg: RunConfig) -> int:
    store = Store(cfg.store_root)
    forest = model.load_forest(args.model if args.model else store.model_path)
    vectors = store.load_features()
    by_occ: dict[str, list] = {}
    for v in vectors:
        by_occ.setdefault(v.occurrence_id, []).append(model.encode(v))
    records = []
    for occ_id in sorted(by_occ):
        ranked = model.rank_occurrence(forest, by_occ[occ_id])
        head = ranked[0][0]
        for cand_id, score in ranked:
            records.append(ScoreRecord(
                candidate_id=cand_id, occurrence_id=occ_id, score=score,
                selected=cand_id == head, scorer="model"))
    store.save_scores(records)
    write_manifest(store, "predict", cfg, [store.features_path])
    print(f"predicted {len(records)} candidates in {len(by_occ)} occurrences")
    return 0


def _selection_predictions(store: Store):
    """(predictions, labels, book_ids) in both report modes, restricted to
    candidates of occurrences that carry a true label."""
    scores = {r.candidate_id: r for r in store.load_scores()}
    instances = _labeled_instances(store)
    rows = []
    for inst in instances:
        rec = scores.get(inst.candidate_id)
        if rec is None:
            continue
        rows.append((rec, inst))
    return rows


def cmd_eval(args, cfg: RunConfig) -> int:
    store = Store(cfg.store_root)
    rows = _selection_predictions(store)
    if not rows:
        log.error("nothing to evaluate: need features, scores, and labels")
        return 2
    labels = [bool(inst.label) for _, inst in rows]
    books = [inst.book_id for _, inst in rows]
    if args.mode == "selection":
        preds = [rec.selected for rec, _ in rows]
    else:
        preds = [rec.score >= args.threshold for rec, _ in rows]
    report = evaluation.prf_by_book(preds, labels, books, mode=args.mode)
    reports_dir = store.root / "reports"
    _atomic_write_text(reports_dir / f"eval_{args.mode}.json",
                       json.dumps(report.to_dict(), ensure_ascii=False, indent=2) + "\n")
    _atomic_write_text(reports_dir / f"eval_{args.mode}.txt", report.render() + "\n")
    # consistency over the current termbase
    entries = build_termbase(store.load_occurrences(), store.load_candidates(),
                             store.load_scores(), store.load_annotations())
    findings = evaluation.consistency_report(entries)
    _atomic_write_text(reports_dir / "consistency.tsv",
                       evaluation.render_consistency_tsv(findings))
    write_manifest(store, "eval", cfg,
                   [store.features_path, store.scores_path, store.annotations_path])
    print(report.render())
    print(f"consistency: {len(findings)} foreign terms with multiple translations")
    return 0


def _suggestions_by_term(store: Store) -> dict[str, list]:
    occurrences = store.load_occurrences()
    candidates = {c.candidate_id: c for c in store.load_candidates()}
    occ_by_id = {o.occurrence_id: o for o in occurrences}
    by_term: dict[str, list[evaluation.Suggestion]] = {}
    for rec in store.load_scores():
        occ = occ_by_id.get(rec.occurrence_id)
        cand = candidates.get(rec.candidate_id)
        if occ is None or cand is None:
            continue
        term = occ.foreign_term
        by_term.setdefault(term, []).append(evaluation.Suggestion(
            occurrence_id=rec.occurrence_id, surface=cand.surface, score=rec.score))
    return {term: evaluation.aggregate_suggestions(term, suggs)
            for term, suggs in by_term.items()}


def cmd_eval_glossary(args, cfg: RunConfig) -> int:
    store = Store(cfg.store_root)
    glossary = evaluation.read_glossary_csv(args.glossary)
    suggestions = _suggestions_by_term(store)
    ks = tuple(range(1, args.k + 1))
    report = evaluation.glossary_report(glossary, suggestions, ks)
    _atomic_write_text(store.root / "reports" / "glossary.json",
                       json.dumps(report, ensure_ascii=False, indent=2) + "\n")
    write_manifest(store, "eval-glossary", cfg,
                   [Path(args.glossary), store.scores_path])
    print(json.dumps(report, ensure_ascii=False, indent=2))
    return 0


def cmd_stats(args, cfg: RunConfig) -> int:
    store = Store(cfg.store_root)
    report = corpus_stats(store.load_occurrences(), store.load_candidates())
    _atomic_write_text(store.root / "reports" / "stats.json",
                       json.dumps(report.to_dict(), ensure_ascii=False, indent=2) + "\n")
    write_manifest(store, "stats", cfg, [store.occurrences_path, store.candidates_path])
    print(report.render())
    return 0


def cmd_export(args, cfg: RunConfig) -> int:
    store = Store(cfg.store_root)
    entries = build_termbase(store.load_occurrences(), store.load_candidates(),
                             store.load_scores(), store.load_annotations())
    data = export_termbase(entries, args.format)
    out = store.termbase_path if args.format == "tsv" else store.root / "termbase.jsonl"
    tmp = out.with_name(out.name + ".tmp")
    tmp.write_bytes(data)
    tmp.replace(out)
    write_manifest(store, "export", cfg,
                   [store.scores_path, store.annotations_path])
    print(f"exported {len(entries)} termbase entries to {out}")
    return 0


def cmd_compact(args, cfg: RunConfig) -> int:
    store = Store(cfg.store_root)
    n = store.compact_annotations()
    print(f"compacted annotation log to {n} records")
    return 0


def cmd_serve(args, cfg: RunConfig) -> int:
    import uvicorn

    from .service import create_app

    store = Store(cfg.store_root)
    app = create_app(store, ui_dir=args.ui, token=args.token)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="termalign",
                     description="Foreign-term / Arabic-term extraction and curation pipeline")
    parser.add_argument("--config", help="JSON config file")
    parser.add_argument("--store", help="store root directory (or MASRAD_STORE)")
    parser.add_argument("--seed", type=int, help="override the run seed")
    parser.add_argument("--threads", type=int, help="cap worker threads")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", help="extract occurrences and candidates from a corpus")
    p.add_argument("input_dir")
    p.set_defaults(fn=cmd_extract)

    p = sub.add_parser("features", help="compute feature vectors")
    p.set_defaults(fn=cmd_features)

    p = sub.add_parser("score-heuristic", help="heuristic scores + draft labels")
    p.set_defaults(fn=cmd_score_heuristic)

    p = sub.add_parser("train", help="train the forest on labeled features")
    p.add_argument("--out", help="model file (default: STORE/model.json)")
    p.add_argument("--trees", type=int, default=252)
    p.add_argument("--train-books", help="comma-separated book ids")
    p.add_argument("--test-books", help="comma-separated book ids")
    p.set_defaults(fn=cmd_train)

    p = sub.add_parser("predict", help="score candidates with a trained model")
    p.add_argument("--model", help="model file (default: STORE/model.json)")
    p.set_defaults(fn=cmd_predict)

    p = sub.add_parser("eval", help="precision/recall/F1 against labels")
    p.add_argument("--mode", choices=["classification", "selection"],
                   default="selection")
    p.add_argument("--threshold", type=float, default=0.5)
    p.set_defaults(fn=cmd_eval)

    p = sub.add_parser("eval-glossary", help="top-k accuracy against a glossary CSV")
    p.add_argument("glossary")
    p.add_argument("--k", type=int, default=3)
    p.set_defaults(fn=cmd_eval_glossary)

    p = sub.add_parser("stats", help="corpus statistics")
    p.set_defaults(fn=cmd_stats)

    p = sub.add_parser("export", help="export the termbase")
    p.add_argument("--format", choices=["tsv", "jsonl"], default="tsv")
    p.set_defaults(fn=cmd_export)

    p = sub.add_parser("compact", help="compact the annotation log")
    p.set_defaults(fn=cmd_compact)

    p = sub.add_parser("serve", help="run the review service")
    p.add_argument("--port", type=int, default=8571)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--ui", help="directory with the built review UI")
    p.add_argument("--token", help="shared X-Review-Token value")
    p.set_defaults(fn=cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        logging.basicConfig(
            level=logging.DEBUG if args.verbose else logging.INFO,
            format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
        cfg = load_config(args.config, args)
        return args.fn(args, cfg)
    except UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return 1
    except ProviderUnavailable as e:
        print(f"provider failure: {e}", file=sys.stderr)
        return 3
    except (FileNotFoundError, json.JSONDecodeError, ValueError) as e:
        print(f"data error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
