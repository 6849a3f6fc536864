"""Command-line interface.

Exit codes: 0 success, 1 configuration error, 2 data error.
"""

from __future__ import annotations

import logging
import sys
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import click

from .errors import ConfigurationError, DataError
from .model import build_ip, collect_arcs, enumerate_triangles, export_lp
from .pipeline import (
    EnsembleSpec,
    ExperimentConfig,
    WeightsSource,
    format_experiment_table,
    reconcile,
    run_procedure_one,
    run_procedure_two,
    write_reconciled,
)
from .relations import TABLE
from .scoring import score_run, write_csv
from .synthetic import SyntheticClassifier, generate_corpus
from .timeml import ClassifierRun, load_corpus, parse_timeml, write_skipped_report


def _read_config(path: str) -> Dict[str, str]:
    values = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"{path}:{lineno}: expected key=value")
        key, value = line.split("=", 1)
        values[key.strip().replace("-", "_")] = value.strip()
    return values


@click.group()
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
              default=None, help="key=value file providing option defaults.")
@click.option("-v", "--verbose", is_flag=True, help="Log progress to stderr.")
@click.pass_context
def cli(ctx, config_path, verbose):
    """Reconcile temporal-relation classifier ensembles with global consistency."""
    logging.basicConfig(
        level=logging.INFO if verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    if config_path:
        defaults = _read_config(config_path)
        default_map = {}
        for cmd_name, cmd in cli.commands.items():  # noqa: F821
            per_cmd = {}
            for param in cmd.params:
                for opt in param.opts:
                    key = opt.lstrip("-").replace("-", "_")
                    if key in defaults:
                        per_cmd[param.name] = defaults[key]
            default_map[cmd_name] = per_cmd
        ctx.default_map = default_map


def _members(text: str) -> Tuple[str, ...]:
    members = tuple(m.strip() for m in text.split(",") if m.strip())
    if not members:
        raise ConfigurationError("ensemble member list is empty")
    return members


def _split_from_file(path: Optional[str]) -> Optional[Tuple[List[str], List[str]]]:
    """Split file: `s1 <doc-id>` / `s2 <doc-id>` lines."""
    if path is None:
        return None
    s1, s2 = [], []
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2 or parts[0] not in ("s1", "s2"):
            raise ConfigurationError(f"{path}:{lineno}: expected 's1|s2 <doc-id>'")
        (s1 if parts[0] == "s1" else s2).append(parts[1])
    return s1, s2


@cli.command("reconcile")
@click.option("--corpus", "corpus_root", required=True,
              type=click.Path(exists=True, file_okay=False))
@click.option("--members", required=True, help="Comma-separated classifier names.")
@click.option("--weights", "weights_path", type=click.Path(exists=True, dir_okay=False),
              default=None, help="Weights file (default: <corpus>/weights.txt).")
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
@click.option("--strict/--no-strict", "strict", default=False,
              help="Exclude NONE from triangle conclusions (ablation mode).")
@click.option("--time-limit", type=float, default=300.0, show_default=True)
def reconcile_cmd(corpus_root, members, weights_path, out_dir, strict, time_limit):
    """Reconcile an ensemble and write TimeML output plus a score CSV."""
    corpus = load_corpus(corpus_root, weights_path)
    result = reconcile(corpus, _members(members), time_limit=time_limit,
                       none_breaks_triangles=strict)
    out = Path(out_dir)
    write_reconciled(result, out / "timeml")
    report = score_run(corpus.reference, result.run)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "scores.csv", "w", encoding="utf-8") as fh:
        write_csv(report, fh)
    if corpus.skipped:
        with open(out / "skipped.txt", "w", encoding="utf-8") as fh:
            write_skipped_report(corpus.skipped, fh)
    click.echo(f"F1 {report.f1:.4f}  P {report.precision:.4f}  R {report.recall:.4f}")


@cli.command("score")
@click.option("--system", "system_dir", required=True,
              type=click.Path(exists=True, file_okay=False))
@click.option("--reference", "reference_dir", required=True,
              type=click.Path(exists=True, file_okay=False))
@click.option("--out", "out_path", type=click.Path(dir_okay=False), default=None,
              help="CSV output path (default: stdout).")
@click.option("--average", type=click.Choice(["micro", "macro"]), default="micro",
              show_default=True)
@click.option("--collapse-identity/--no-collapse-identity", default=True,
              help="Treat IDENTITY as SIMULTANEOUS when scoring.")
def score_cmd(system_dir, reference_dir, out_path, average, collapse_identity):
    """Score a system annotation directory against a reference directory."""
    def load_dir(directory, name):
        run = ClassifierRun(name, 1.0)
        for path in sorted(Path(directory).glob("*.tml")):
            run.documents[path.stem] = parse_timeml(path.read_bytes(), path.stem).links
        if not run.documents:
            raise DataError(f"no .tml files in {directory}")
        return run

    reference = load_dir(reference_dir, "reference")
    system = load_dir(system_dir, "system")
    report = score_run(reference, system, average=average,
                       collapse_identity=collapse_identity)
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            write_csv(report, fh)
    else:
        write_csv(report, click.get_text_stream("stdout"))


@cli.command("export-lp")
@click.option("--corpus", "corpus_root", required=True,
              type=click.Path(exists=True, file_okay=False))
@click.option("--members", required=True)
@click.option("--weights", "weights_path", type=click.Path(exists=True, dir_okay=False),
              default=None)
@click.option("--doc", "doc_id", required=True)
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
@click.option("--strict/--no-strict", "strict", default=False)
def export_lp_cmd(corpus_root, members, weights_path, doc_id, out_path, strict):
    """Export one document's integer program in CPLEX LP format."""
    corpus = load_corpus(corpus_root, weights_path)
    names = _members(members)
    unknown = sorted(set(names) - set(corpus.runs))
    if unknown:
        raise ConfigurationError(f"unknown classifier name(s): {', '.join(unknown)}")
    votes = collect_arcs([corpus.runs[n] for n in names], doc_id)
    if not votes.arcs:
        raise DataError(f"no classifier annotates document {doc_id!r}")
    program = build_ip(votes, enumerate_triangles(votes.arcs),
                       none_breaks_triangles=strict)
    with open(out_path, "wb") as fh:
        export_lp(program, fh)
    click.echo(f"{doc_id}: {program.num_vars} variables, {program.num_rows} rows")


@cli.command("experiment")
@click.option("--corpus", "corpus_root", required=True,
              type=click.Path(exists=True, file_okay=False))
@click.option("--procedure", type=click.Choice(["1", "2"]), required=True)
@click.option("--ensembles", "ensembles_path", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="One ensemble per line: 'label: name,name,...' or 'name,name'.")
@click.option("--weights", "weights_path", type=click.Path(exists=True, dir_okay=False),
              default=None)
@click.option("--split", "split_path", type=click.Path(exists=True, dir_okay=False),
              default=None, help="Doc-id split file ('s1 <doc>' / 's2 <doc>' lines).")
@click.option("--weights-source", type=click.Choice([s.value for s in WeightsSource]),
              default=None, help="Override the weight derivation per procedure.")
@click.option("--out", "out_dir", type=click.Path(file_okay=False), default=None)
@click.option("--strict/--no-strict", "strict", default=False)
@click.option("--time-limit", type=float, default=300.0, show_default=True)
def experiment_cmd(corpus_root, procedure, ensembles_path, weights_path, split_path,
                   weights_source, out_dir, strict, time_limit):
    """Run experiment procedure 1 or 2 over a file of ensembles."""
    default_source = (WeightsSource(weights_source) if weights_source
                      else (WeightsSource.FULL_REFERENCE if procedure == "1"
                            else WeightsSource.S1))
    ensembles = []
    for raw in Path(ensembles_path).read_text(encoding="utf-8").splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        label, _, members = line.rpartition(":")
        ensembles.append(EnsembleSpec(_members(members), default_source, label.strip()))
    if not ensembles:
        raise ConfigurationError(f"no ensembles defined in {ensembles_path}")

    config = ExperimentConfig(
        corpus_root=Path(corpus_root),
        split=_split_from_file(split_path),
        time_limit=time_limit,
        none_breaks_triangles=strict,
        weights_path=Path(weights_path) if weights_path else None,
    )
    runner = run_procedure_one if procedure == "1" else run_procedure_two
    rows = runner(config, ensembles)
    table = format_experiment_table(rows)
    click.echo(table, nl=False)
    if out_dir:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / f"procedure{procedure}.txt").write_text(table, encoding="utf-8")
        for row in rows:
            with open(out / f"{row.spec.display().replace(', ', '_')}.csv",
                      "w", encoding="utf-8") as fh:
                write_csv(row.report, fh)


@cli.command("gen-synthetic")
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--docs", type=int, default=10, show_default=True)
@click.option("--classifiers", default="alpha:0.1,beta:0.25,gamma:0.4",
              show_default=True, help="name:flip-rate pairs, comma-separated.")
@click.option("--density", type=float, default=0.6, show_default=True)
def gen_synthetic_cmd(out_dir, seed, docs, classifiers, density):
    """Generate a fixed-seed synthetic corpus."""
    specs = []
    for part in classifiers.split(","):
        name, _, rate = part.partition(":")
        if not name.strip():
            raise ConfigurationError("bad --classifiers value")
        try:
            specs.append(SyntheticClassifier(name.strip(),
                                             float(rate) if rate else 0.2))
        except ValueError:
            raise ConfigurationError(f"bad flip rate in {part!r}")
    doc_ids = generate_corpus(Path(out_dir), seed=seed, n_docs=docs,
                              classifiers=specs, arc_density=density)
    click.echo(f"wrote {len(doc_ids)} documents for {len(specs)} classifiers "
               f"to {out_dir}")


@cli.command("dump-composition-table")
def dump_table_cmd():
    """Print the 14x14 composition table grid."""
    click.echo(TABLE.dump(), nl=False)


def main(argv=None):
    try:
        cli.main(args=argv, standalone_mode=False)
    except click.ClickException as exc:
        exc.show()
        sys.exit(1)
    except click.Abort:
        sys.exit(1)
    except ConfigurationError as exc:
        click.echo(f"configuration error: {exc}", err=True)
        sys.exit(1)
    except DataError as exc:
        click.echo(f"data error: {exc}", err=True)
        sys.exit(2)


if __name__ == "__main__":
    main()
