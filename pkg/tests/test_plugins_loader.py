import logging
import textwrap

from tensorpca.algorithms import RunContext
from tensorpca.model import generate
from tensorpca.plugins.base import RecoveryPlugin
from tensorpca.plugins_loader import build_algorithm_options, load_algorithm_plugins

EXTERNAL = textwrap.dedent('''
    import time

    from tensorpca.algorithms import build_trace
    from tensorpca.objective import x_dagger_unit


    class DaggerOnly:
        name = "dagger-only"
        seeded = False
        description = "Returns the homotopy initialization unchanged"

        def run(self, T, ctx):
            return build_trace(self.name, [x_dagger_unit(T)], True, ctx.v, time.perf_counter())


    def get_plugin():
        return DaggerOnly()
''')


def test_bundled_plugins_follow_the_protocol():
    plugins = load_algorithm_plugins()
    assert len(plugins) == 6
    for name, plugin in plugins.items():
        assert isinstance(plugin, RecoveryPlugin)
        assert plugin.name == name and plugin.description


def test_external_plugins_are_loaded(tmp_path, caplog):
    (tmp_path / "dagger_only.py").write_text(EXTERNAL)
    (tmp_path / "broken.py").write_text("raise RuntimeError('boom')\n")
    (tmp_path / "not_a_plugin.py").write_text("def get_plugin():\n    return object()\n")
    (tmp_path / "helpers.py").write_text("VALUE = 1\n")
    with caplog.at_level(logging.WARNING):
        plugins = load_algorithm_plugins(tmp_path)
    assert "dagger-only" in plugins and len(plugins) == 7
    assert "broken" in caplog.text
    assert "did not return a recovery plugin" in caplog.text

    inst = generate(12, 60.0, 1.0, seed=1)
    trace = plugins["dagger-only"].run(inst.tensor, RunContext(v=inst.v))
    assert trace.iterations_used == 0
    assert trace.final_correlation > 0.9


def test_plugins_dir_from_environment(tmp_path, monkeypatch):
    from tensorpca import config

    (tmp_path / "dagger_only.py").write_text(EXTERNAL)
    monkeypatch.setenv("TPCA_PLUGINS_DIR", str(tmp_path))
    config.reset()
    assert "dagger-only" in load_algorithm_plugins()


def test_missing_plugins_dir_is_tolerated(tmp_path):
    assert len(load_algorithm_plugins(tmp_path / "nowhere")) == 6


def test_build_algorithm_options_sorted():
    options = build_algorithm_options(load_algorithm_plugins())
    values = [value for _, value in options]
    assert values == sorted(values)
    assert options[values.index("homotopy")][0].startswith("homotopy - ")
    assert all(" - " in label for label, _ in options)
