"""
Interface en ligne de commande : génération de données, clustering statique,
simulation en fenêtre glissante, score NMI et étude de faisabilité.
"""

import argparse
import logging
import sys

from clustering.hierarchy import nmi
from clustering.static_hdbscan import run_static
from harness.datasets import (gen_gaussian_mixture, load_csv, read_labels_csv,
                              write_labels_csv, write_points_csv)
from harness.feasibility import run_feasibility
from harness.report_statistics import REPORT_FORMATS, ReportStatistics, emit_report
from harness.window_manager import WindowConfig, run_sliding_window
from strategies.modes import MODES
from utils.exceptions import (ClusteringError, ConflictError, InputError, NotFoundError,
                              ReportIOError)
from utils.logging_setup import configure_logging
from utils.presets import DEFAULT_MIN_PTS, Presets

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_INTERNAL = 2


def _add_stream_arguments(parser):
    source = parser.add_mutually_exclusive_group(required=True)
    source.add_argument("--input", help="fichier CSV de points")
    source.add_argument("--generate", type=int, metavar="N", help="générer N points gaussiens")
    parser.add_argument("--dim", type=int, default=10, help="dimension des points générés")
    parser.add_argument("--components", type=int, default=10, help="composantes du mélange généré")
    parser.add_argument("--seed", type=int, default=0)


def build_parser():
    """Construit l'analyseur d'arguments."""
    parser = argparse.ArgumentParser(prog="dynamic-hdbscan", description=__doc__)
    parser.add_argument("-v", "--verbose", action="count", default=0, help="-v infos, -vv détails")
    commands = parser.add_subparsers(dest="command", required=True)

    gen = commands.add_parser("gen", help="générer un mélange gaussien")
    gen.add_argument("--n", type=int, required=True)
    gen.add_argument("--dim", type=int, default=2)
    gen.add_argument("--components", type=int, default=3)
    gen.add_argument("--overlap", type=float, default=0.1)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", required=True)
    gen.add_argument("--labels", help="fichier des étiquettes vraies")

    static = commands.add_parser("static", help="clustering statique ponctuel")
    static.add_argument("--input", required=True)
    static.add_argument("--minpts", type=int, default=DEFAULT_MIN_PTS)
    static.add_argument("--min-cluster-size", type=float, default=None)
    static.add_argument("--out", required=True)

    window = commands.add_parser("window", help="simulation en fenêtre glissante")
    _add_stream_arguments(window)
    window.add_argument("--mode", choices=sorted(MODES), default="exact")
    window.add_argument("--preset", default="DESK", help=f"préréglage ({', '.join(Presets.names())})")
    window.add_argument("--w", type=int)
    window.add_argument("--d", type=int)
    window.add_argument("--i", type=int)
    window.add_argument("--minpts", type=int)
    window.add_argument("--rho", type=float)
    window.add_argument("--min-cluster-size", type=float, default=None)
    window.add_argument("--max-slides", type=int, default=None)
    window.add_argument("--report", default="report.jsonl")
    window.add_argument("--format", choices=REPORT_FORMATS, default="jsonl")
    window.add_argument("--summary", help="résumé texte du rapport (latences, NMI)")
    window.add_argument("--audit", action="store_true", help="vérifier les invariants après chaque fenêtre")

    score = commands.add_parser("nmi", help="NMI entre deux fichiers d'étiquettes")
    score.add_argument("labels_a")
    score.add_argument("labels_b")

    feasibility = commands.add_parser("feasibility", help="étude de faisabilité des mises à jour exactes")
    _add_stream_arguments(feasibility)
    feasibility.add_argument("--minpts", type=int, default=DEFAULT_MIN_PTS)
    feasibility.add_argument("--op", choices=("insert", "delete"), default="delete")
    feasibility.add_argument("--fractions", default="0.01,0.05,0.1")
    feasibility.add_argument("--out", help="fichier CSV des mesures")
    return parser


def _load_stream(args):
    if args.input:
        return load_csv(args.input)
    points, _ = gen_gaussian_mixture(args.generate, args.dim, args.components, 0.1, args.seed)
    return points


def _cmd_gen(args):
    points, labels = gen_gaussian_mixture(args.n, args.dim, args.components, args.overlap, args.seed)
    write_points_csv(points, args.out)
    if args.labels:
        write_labels_csv({p.id: label for p, label in zip(points, labels)}, args.labels)
    print(f"{len(points)} points écrits dans {args.out}")


def _cmd_static(args):
    result = run_static(load_csv(args.input), args.minpts, args.min_cluster_size)
    write_labels_csv(result.flat.labels, args.out)
    print(f"{result.flat.n_clusters} clusters, poids du bruit {result.flat.noise_weight:g}")


def _cmd_window(args):
    preset = Presets.get_preset(args.preset)
    config = WindowConfig(
        window_size=args.w if args.w is not None else preset["window_size"],
        slide_delete=args.d if args.d is not None else preset["slide_delete"],
        slide_insert=args.i if args.i is not None else preset["slide_insert"],
        min_pts=args.minpts if args.minpts is not None else preset["min_pts"],
        mode=args.mode,
        rho=args.rho if args.rho is not None else preset["rho"],
        seed=args.seed,
        min_cluster_weight=args.min_cluster_size,
        max_slides=args.max_slides,
        audit=args.audit,
    )
    reports = run_sliding_window(config, _load_stream(args))
    emit_report(reports, args.report, args.format)
    if args.summary:
        ReportStatistics(args.report).export_summary(args.summary)
    for report in reports:
        print(f"fenêtre {report.slide}: en ligne {report.t_online_ms:.1f} ms, "
              f"hors ligne {report.t_offline_ms:.1f} ms, NMI {report.nmi:.4f}")


def _cmd_nmi(args):
    labels_a = read_labels_csv(args.labels_a)
    labels_b = read_labels_csv(args.labels_b)
    if set(labels_a) != set(labels_b):
        raise InputError("Les deux fichiers ne portent pas sur les mêmes identifiants")
    ids = sorted(labels_a)
    print(f"{nmi([labels_a[i] for i in ids], [labels_b[i] for i in ids]):.6f}")


def _cmd_feasibility(args):
    table = run_feasibility(_load_stream(args), args.minpts, args.op, args.fractions, args.seed)
    if args.out:
        try:
            table.to_csv(args.out, index=False)
        except OSError as error:
            raise ReportIOError(f"Ecriture impossible de {args.out} : {error}") from None
    print(table.to_string(index=False))


COMMANDS = {
    "gen": _cmd_gen,
    "static": _cmd_static,
    "window": _cmd_window,
    "nmi": _cmd_nmi,
    "feasibility": _cmd_feasibility,
}


def main(argv=None):
    """
    Point d'entrée de la ligne de commande.

    Returns:
        int: 0 en cas de succès, 1 pour une erreur d'entrée, 2 pour une violation d'invariant
    """
    args = build_parser().parse_args(argv)
    configure_logging(args.verbose)
    try:
        COMMANDS[args.command](args)
    except (InputError, ReportIOError, ConflictError, NotFoundError) as error:
        print(f"Erreur : {error}", file=sys.stderr)
        return EXIT_INPUT
    except ClusteringError as error:
        # invariant violé, état incohérent ou résumé négatif
        logger.error("Erreur interne : %s", error)
        print(f"Erreur interne : {error}", file=sys.stderr)
        return EXIT_INTERNAL
    return EXIT_OK
