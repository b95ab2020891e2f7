from __future__ import annotations

import importlib
import importlib.util
import logging
import pkgutil
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from .config import get_settings
from .errors import InvalidArgumentError
from .plugins.base import RecoveryPlugin

logger = logging.getLogger(__name__)

PACKAGE_PLUGINS = Path(__file__).resolve().parent / "plugins"


def _load_external(plugins_dir: Path, mod_name: str):
    spec = importlib.util.spec_from_file_location(f"tpca_ext_{mod_name}", plugins_dir / f"{mod_name}.py")
    if spec is None or spec.loader is None:
        return None
    module = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(module)
    return module


def _register(plugins: Dict[str, RecoveryPlugin], module) -> None:
    get_plugin = getattr(module, "get_plugin", None)
    if not callable(get_plugin):
        return
    instance = get_plugin()
    if not isinstance(instance, RecoveryPlugin) or not instance.name:
        logger.warning("[startup] %s.get_plugin() did not return a recovery plugin", module.__name__)
        return
    plugins[instance.name] = instance
    logger.debug("[startup] Plugin registered: %s (seeded: %s)", instance.name, instance.seeded)


def load_algorithm_plugins(extra_dir: Optional[Path] = None) -> Dict[str, RecoveryPlugin]:
    """Load the bundled algorithm plugins, then any from TPCA_PLUGINS_DIR / `extra_dir`.

    External plugins with the same name replace bundled ones.
    """
    plugins: Dict[str, RecoveryPlugin] = {}
    for m_info in pkgutil.iter_modules([str(PACKAGE_PLUGINS)]):
        if m_info.name in {"__init__", "base"}:
            continue
        try:
            module = importlib.import_module(f"tensorpca.plugins.{m_info.name}")
        except ImportError as e:
            logger.warning("[startup] Import failed: %s: %s", m_info.name, e)
            continue
        _register(plugins, module)
    extra_dir = extra_dir or get_settings().plugins_dir
    if extra_dir is not None:
        logger.info("[startup] Searching plugins in: %s %s", extra_dir, "(exists)" if extra_dir.exists() else "(missing)")
        if extra_dir.exists():
            for m_info in pkgutil.iter_modules([str(extra_dir)]):
                if m_info.name in {"__init__", "base"}:
                    continue
                try:
                    module = _load_external(extra_dir, m_info.name)
                except Exception as e:  # third-party code: report and skip
                    logger.warning("[startup] Direct load failed: %s: %s", m_info.name, e)
                    continue
                if module is not None:
                    _register(plugins, module)
    return plugins


_cache: Optional[Dict[str, RecoveryPlugin]] = None


def available_plugins() -> Dict[str, RecoveryPlugin]:
    global _cache
    if _cache is None:
        _cache = load_algorithm_plugins()
    return _cache


def get_algorithm(name: str) -> RecoveryPlugin:
    plugins = available_plugins()
    try:
        return plugins[name]
    except KeyError:
        raise InvalidArgumentError(f"unknown algorithm {name!r}; choose from {', '.join(sorted(plugins))}") from None


def build_algorithm_options(plugins: Dict[str, RecoveryPlugin]) -> List[Tuple[str, str]]:
    """(label, value) pairs for selection widgets, sorted by tag.

    Example: ("homotopy - Power method from the homotopy initialization ...", "homotopy").
    """
    return [(f"{name} - {plugins[name].description}", name) for name in sorted(plugins)]
