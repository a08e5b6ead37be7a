import logging
import os
from typing import Optional

from attr import dataclass
from dotenv import load_dotenv

from ..consts import consts

_CONFIG_ENV_KEY_SYMMETRY_TOL = "SPIC_SYMMETRY_TOL"
_CONFIG_ENV_KEY_PSD_TOL = "SPIC_PSD_TOL"
_CONFIG_ENV_KEY_DEGENERACY_TOL = "SPIC_DEGENERACY_TOL"
_CONFIG_ENV_KEY_CHECK_TOL = "SPIC_TOLERANCE"
_CONFIG_ENV_KEY_TREE_MODE = "SPIC_TREE_MODE"
_CONFIG_ENV_KEY_FAST_PATH = "SPIC_FAST_PATH"
_CONFIG_ENV_KEY_NETWORK_DIR = "SPIC_NETWORK_DIR"
_CONFIG_ENV_KEY_WORKERS = "SPIC_WORKERS"
_CONFIG_ENV_KEY_MAX_SESSIONS = "SPIC_MAX_SESSIONS"
_CONFIG_ENV_KEY_LOG_LEVEL = "SPIC_LOG_LEVEL"

logger = logging.getLogger(consts.LOGGER_NAME)

# Load environment variables at package initialization
load_dotenv()


@dataclass(frozen=True)
class Tolerances:
    """Matrix checks used across the engine; see consts for the defaults."""

    symmetry: float = consts.SYMMETRY_TOL
    psd: float = consts.PSD_TOL
    degeneracy: float = consts.DEGENERACY_TOL


DEFAULT_TOLERANCES = Tolerances()


@dataclass
class Config:
    tolerances: Tolerances
    check_tol: float
    tree_mode: str
    substitution_fast_path: bool
    network_dir: str
    workers: int
    log_level: Optional[str]
    max_sessions: int = consts.MAX_SESSIONS


def load_config() -> Config:
    config = Config(
        tolerances=Tolerances(
            symmetry=_get_float_from_env(_CONFIG_ENV_KEY_SYMMETRY_TOL, consts.SYMMETRY_TOL),
            psd=_get_float_from_env(_CONFIG_ENV_KEY_PSD_TOL, consts.PSD_TOL),
            degeneracy=_get_float_from_env(_CONFIG_ENV_KEY_DEGENERACY_TOL, consts.DEGENERACY_TOL),
        ),
        check_tol=_get_float_from_env(_CONFIG_ENV_KEY_CHECK_TOL, consts.CHECK_TOL),
        tree_mode=os.getenv(_CONFIG_ENV_KEY_TREE_MODE),
        substitution_fast_path=_get_bool_from_env(_CONFIG_ENV_KEY_FAST_PATH, True),
        network_dir=os.getenv(_CONFIG_ENV_KEY_NETWORK_DIR),
        workers=int(_get_float_from_env(_CONFIG_ENV_KEY_WORKERS, 4)),
        log_level=os.getenv(_CONFIG_ENV_KEY_LOG_LEVEL),
        max_sessions=int(_get_float_from_env(_CONFIG_ENV_KEY_MAX_SESSIONS, consts.MAX_SESSIONS)),
    )

    if not config.tree_mode or len(config.tree_mode) == 0:
        config.tree_mode = consts.TREE_MODE_BUSHY
    if config.tree_mode not in (consts.TREE_MODE_BUSHY, consts.TREE_MODE_CHAIN):
        logger.warning(f"Unknown tree mode {config.tree_mode!r}, using {consts.TREE_MODE_BUSHY}")
        config.tree_mode = consts.TREE_MODE_BUSHY
    if not config.network_dir or len(config.network_dir) == 0:
        config.network_dir = ""
    if config.workers < 1:
        config.workers = 1
    if config.max_sessions < 1:
        config.max_sessions = 1

    logger.info(f"Configured   tolerances: {config.tolerances}")
    logger.info(f"Configured    check_tol: {config.check_tol}")
    logger.info(f"Configured    tree_mode: {config.tree_mode}")
    logger.info(f"Configured    fast_path: {config.substitution_fast_path}")
    logger.info(f"Configured  network_dir: {config.network_dir}")
    logger.info(f"Configured      workers: {config.workers}")
    logger.info(f"Configured max_sessions: {config.max_sessions}")
    return config


def _get_float_from_env(key: str, default: float) -> float:
    raw = os.getenv(key)
    if raw is None or len(raw.strip()) == 0:
        return default
    try:
        value = float(raw)
    except ValueError:
        logger.warning(f"Ignoring {key}={raw!r}: not a number")
        return default
    if value <= 0:
        logger.warning(f"Ignoring {key}={raw!r}: must be positive")
        return default
    return value


def _get_bool_from_env(key: str, default: bool) -> bool:
    raw = os.getenv(key)
    if raw is None or len(raw.strip()) == 0:
        return default
    return raw.strip().lower() not in ("0", "false", "no", "off")
