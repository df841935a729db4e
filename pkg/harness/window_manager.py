"""
Classe gérant le déroulement d'une simulation en fenêtre glissante.
"""

import logging
import time
from collections import deque
from dataclasses import asdict, dataclass, field

from clustering.hierarchy import nmi
from clustering.static_hdbscan import run_static
from strategies.modes import MODES, create_mode
from utils.exceptions import InputError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class WindowConfig:
    """Paramètres d'une simulation en fenêtre glissante."""

    window_size: int
    slide_delete: int
    slide_insert: int
    min_pts: int
    mode: str = "exact"
    rho: float = 0.01
    seed: int = 0
    min_cluster_weight: float = None
    max_slides: int = None
    audit: bool = False

    def __post_init__(self):
        if self.mode not in MODES:
            raise InputError(f"Mode inconnu : {self.mode}")
        if self.slide_delete < 0 or self.slide_insert < 0:
            raise InputError("Les nombres de suppressions et d'insertions doivent être positifs")
        if self.slide_delete > self.window_size:
            raise InputError(f"D ({self.slide_delete}) dépasse la fenêtre W ({self.window_size})")
        if self.window_size <= self.min_pts:
            raise InputError(f"La fenêtre ({self.window_size}) doit dépasser minPts ({self.min_pts})")
        if self.window_size - self.slide_delete + self.slide_insert <= self.min_pts:
            raise InputError("La fenêtre après glissement doit contenir plus de minPts points")
        if self.mode == "bubble" and not 0.0 < self.rho <= 1.0:
            raise InputError(f"Le taux de compression doit être dans ]0, 1] ({self.rho})")


@dataclass
class SlideReport:
    """Mesures d'une fenêtre."""

    slide: int
    t_online_ms: float
    t_offline_ms: float
    nmi: float
    n_resident: int
    mode: str
    seed: int
    rknn_mean: float = None
    boruvka_components: int = None
    n_clusters: int = 0
    t_static_ms: float = None
    t_core_ms: float = None
    t_mst_ms: float = None
    extra: dict = field(default_factory=dict)

    def to_record(self):
        """Enregistrement plat, champs supplémentaires du mode inclus."""
        record = asdict(self)
        record.update(record.pop("extra"))
        return record


class WindowManager:
    """Classe pilotant une simulation : chargement, glissements, mesure et comparaison à la référence statique."""

    def __init__(self, config):
        """
        Initialise un nouveau pilote.

        Args:
            config (WindowConfig): Les paramètres de la simulation
        """
        self.config = config
        self.mode = create_mode(config.mode, config.min_pts, config.rho, config.min_cluster_weight)
        self.resident = deque()
        self.slide = 0

    def resident_ids(self):
        """Identifiants des points résidents, du plus ancien au plus récent."""
        return [p.id for p in self.resident]

    def run_sliding_window(self, stream):
        """
        Exécute la simulation sur un flux de points.

        Args:
            stream (sequence of Point): Le flux, dans l'ordre d'arrivée

        Returns:
            list: Un SlideReport par fenêtre
        """
        cfg = self.config
        stream = list(stream)
        if len(stream) < cfg.window_size:
            raise InputError(f"Flux trop court ({len(stream)}) pour une fenêtre de {cfg.window_size}")
        if len(stream) < cfg.window_size + cfg.slide_insert:
            logger.warning("Flux trop court pour une seule fenêtre complète (%d points)", len(stream))

        self.resident = deque(stream[:cfg.window_size])
        self.mode.load(list(self.resident))
        cursor = cfg.window_size
        max_slides = cfg.max_slides
        if max_slides is None and cfg.slide_insert == 0:
            max_slides = 1

        reports = []
        while cursor + cfg.slide_insert <= len(stream):
            if max_slides is not None and self.slide >= max_slides:
                break
            if len(self.resident) - cfg.slide_delete + cfg.slide_insert <= cfg.min_pts:
                logger.warning("Fenêtre trop petite pour continuer (%d résidents)", len(self.resident))
                break
            deleted = [self.resident.popleft().id for _ in range(min(cfg.slide_delete, len(self.resident)))]
            inserted = stream[cursor:cursor + cfg.slide_insert]
            cursor += cfg.slide_insert
            self.resident.extend(inserted)
            self.slide += 1
            reports.append(self._run_slide(deleted, inserted))

        if cursor + cfg.slide_insert > len(stream):
            logger.info("Flux épuisé après %d fenêtres", self.slide)
        return reports

    def _run_slide(self, deleted, inserted):
        cfg = self.config
        start = time.perf_counter()
        online = self.mode.apply_slide(deleted, inserted)
        t_online = (time.perf_counter() - start) * 1000.0

        start = time.perf_counter()
        labels = self.mode.offline()
        t_offline = (time.perf_counter() - start) * 1000.0

        ids = sorted(self.resident_ids())
        t_static = None
        if cfg.mode == "static":
            baseline = labels
        else:
            start = time.perf_counter()
            baseline = run_static(self.resident, cfg.min_pts, cfg.min_cluster_weight).flat.labels
            t_static = (time.perf_counter() - start) * 1000.0
        score = nmi([labels[i] for i in ids], [baseline[i] for i in ids])

        if cfg.audit:
            self.mode.audit()

        report = SlideReport(
            slide=self.slide,
            t_online_ms=t_online,
            t_offline_ms=t_offline,
            nmi=score,
            n_resident=len(self.resident),
            mode=cfg.mode,
            seed=cfg.seed,
            rknn_mean=online.get("rknn_mean"),
            boruvka_components=online.get("boruvka_components"),
            n_clusters=len({label for label in labels.values() if label >= 0}),
            t_static_ms=t_static,
            t_core_ms=online.get("t_core_ms"),
            t_mst_ms=online.get("t_mst_ms"),
            extra=self.mode.extra_fields(),
        )
        logger.info(
            "Fenêtre %d : en ligne %.1f ms, hors ligne %.1f ms, NMI %.4f, %d clusters",
            report.slide, t_online, t_offline, score, report.n_clusters,
        )
        return report


def run_sliding_window(cfg, stream):
    """
    Exécute une simulation en fenêtre glissante.

    Args:
        cfg (WindowConfig): Les paramètres
        stream (sequence of Point): Le flux de points

    Returns:
        list: Un SlideReport par fenêtre
    """
    return WindowManager(cfg).run_sliding_window(stream)
