"""
Emission des rapports de simulation et statistiques sur les rapports produits.
"""

import logging
import os
from datetime import datetime

import pandas as pd

from utils.exceptions import InputError, ReportIOError

logger = logging.getLogger(__name__)

# Champs stables d'un rapport, dans l'ordre d'émission
REPORT_FIELDS = [
    "slide", "t_online_ms", "t_offline_ms", "nmi", "n_resident",
    "mode", "seed", "rknn_mean", "boruvka_components", "t_core_ms", "t_mst_ms",
]

REPORT_FORMATS = ("jsonl", "csv")


def _records(reports):
    records = []
    for report in reports:
        record = report.to_record() if hasattr(report, "to_record") else dict(report)
        ordered = {name: record.pop(name, None) for name in REPORT_FIELDS}
        ordered.update(record)
        records.append(ordered)
    return records


def emit_report(reports, path, fmt="jsonl"):
    """
    Ecrit un enregistrement par fenêtre.

    Args:
        reports (sequence of SlideReport): Les rapports
        path (str): Chemin du fichier
        fmt (str, optional): 'jsonl' ou 'csv'. Par défaut 'jsonl'.

    Raises:
        InputError: Si le format est inconnu
        ReportIOError: Si l'écriture échoue
    """
    if fmt not in REPORT_FORMATS:
        raise InputError(f"Format de rapport inconnu : {fmt}")
    records = _records(reports)
    frame = pd.DataFrame(records, columns=list(records[0]) if records else REPORT_FIELDS)
    try:
        if fmt == "csv":
            frame.to_csv(path, index=False)
        elif frame.empty:
            open(path, "w", encoding="utf-8").close()
        else:
            # valeurs manquantes écrites null, flottants à 15 décimales
            frame.to_json(path, orient="records", lines=True, double_precision=15)
    except OSError as error:
        raise ReportIOError(f"Ecriture impossible de {path} : {error}") from None
    logger.info("Rapport de %d fenêtres écrit dans %s", len(records), path)


def load_report(path):
    """
    Relit un rapport JSONL ou CSV (format déduit de l'extension).

    Returns:
        pandas.DataFrame: Une ligne par fenêtre
    """
    if not os.path.exists(path):
        raise ReportIOError(f"Fichier introuvable : {path}")
    if path.endswith(".csv"):
        try:
            return pd.read_csv(path, float_precision="round_trip")
        except pd.errors.EmptyDataError:
            return pd.DataFrame(columns=REPORT_FIELDS)
    if os.path.getsize(path) == 0:
        return pd.DataFrame(columns=REPORT_FIELDS)
    try:
        return pd.read_json(path, orient="records", lines=True, precise_float=True, convert_dates=False)
    except ValueError as error:
        raise InputError(f"Rapport JSONL illisible {path} : {error}") from None


class ReportStatistics:
    """Classe pour générer des statistiques sur un rapport de simulation."""

    def __init__(self, report_file):
        """
        Initialise un nouveau gestionnaire de statistiques.

        Args:
            report_file (str): Chemin vers le rapport (JSONL ou CSV)
        """
        self.report_file = report_file
        self.report_data = pd.DataFrame(columns=REPORT_FIELDS)
        self.reload_data()

    def reload_data(self):
        """Recharge les données du rapport."""
        if os.path.exists(self.report_file):
            self.report_data = load_report(self.report_file)

    def get_slide_count(self):
        return len(self.report_data)

    def get_mean_latency(self):
        """
        Calcule la latence moyenne de chaque phase.

        Returns:
            dict: {'online': ms, 'offline': ms, 'total': ms}
        """
        if self.report_data.empty:
            return {"online": 0.0, "offline": 0.0, "total": 0.0}
        online = float(self.report_data["t_online_ms"].mean())
        offline = float(self.report_data["t_offline_ms"].mean())
        return {"online": online, "offline": offline, "total": online + offline}

    def get_mean_nmi(self):
        if self.report_data.empty:
            return 0.0
        return float(self.report_data["nmi"].mean())

    def get_latency_by_mode(self):
        """
        Latence totale moyenne par mode.

        Returns:
            dict: mode -> latence moyenne (ms)
        """
        if self.report_data.empty:
            return {}
        totals = self.report_data["t_online_ms"] + self.report_data["t_offline_ms"]
        return {mode: float(value) for mode, value in totals.groupby(self.report_data["mode"]).mean().items()}

    def export_summary(self, output_file="data/report_summary.txt"):
        """
        Exporte un résumé lisible du rapport dans un fichier texte.

        Args:
            output_file (str, optional): Chemin du fichier. Par défaut "data/report_summary.txt".

        Returns:
            str: Le chemin du fichier écrit
        """
        latency = self.get_mean_latency()
        by_mode = self.get_latency_by_mode()
        try:
            directory = os.path.dirname(output_file)
            if directory:
                os.makedirs(directory, exist_ok=True)
            with open(output_file, "w", encoding="utf-8") as f:
                f.write("================================================\n")
                f.write("     RAPPORT DE SIMULATION EN FENÊTRE GLISSANTE  \n")
                f.write("================================================\n\n")
                f.write(f"Date du rapport: {datetime.now().strftime('%d/%m/%Y %H:%M:%S')}\n")
                f.write(f"Fichier de données: {self.report_file}\n\n")

                f.write("------------------------------------------------\n")
                f.write("1. RÉSUMÉ\n")
                f.write("------------------------------------------------\n")
                f.write(f"   Fenêtres: {self.get_slide_count()}\n")
                f.write(f"   NMI moyenne: {self.get_mean_nmi():.4f}\n\n")

                f.write("------------------------------------------------\n")
                f.write("2. LATENCE MOYENNE PAR FENÊTRE\n")
                f.write("------------------------------------------------\n")
                f.write(f"   En ligne: {latency['online']:.1f} ms\n")
                f.write(f"   Hors ligne: {latency['offline']:.1f} ms\n")
                f.write(f"   Total: {latency['total']:.1f} ms\n\n")

                if by_mode:
                    f.write("------------------------------------------------\n")
                    f.write("3. LATENCE PAR MODE\n")
                    f.write("------------------------------------------------\n")
                    for mode, value in sorted(by_mode.items()):
                        f.write(f"   {mode}: {value:.1f} ms\n")
                    f.write("\n")

                f.write("================================================\n")
                f.write("                FIN DU RAPPORT                  \n")
                f.write("================================================\n")
        except OSError as error:
            raise ReportIOError(f"Ecriture impossible de {output_file} : {error}") from None
        return output_file
