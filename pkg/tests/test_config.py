import pytest

from dynnet.config import (ExperimentConfig, config_to_dict, config_to_dotlist, list_presets, load_config, parse_dotlist,
                           time_scale_value)
from dynnet.errors import ConfigError


def test_defaults():
    config = load_config()
    assert isinstance(config, ExperimentConfig)
    assert config.mode == 'discover' and config.solver.scheme == 'BDF2'
    assert config.train.ic_weight == 1e3 and config.train.num_test_points == 200
    assert config.stability.schemes[0] == 'AB1' and len(config.stability.schemes) == 15


@pytest.mark.parametrize('mode, epochs', [
    ('discover'            , 2000),
    ('estimate'            , 500),
    ('estimate-no-pretrain', 500),
])
def test_adam_epoch_defaults_follow_the_task(mode, epochs):
    config = load_config(overrides = [f"mode={mode}"])
    assert config.train.adam_epochs == epochs
    assert config.train.pretrain.adam_epochs == 1000

    compare = load_config(overrides = ['mode=compare-lmm', 'compare.task=estimate'])
    assert compare.train.adam_epochs == 500
    assert load_config(overrides = [f"mode={mode}", 'train.adam_epochs=3']).train.adam_epochs == 3


@pytest.mark.parametrize('name', ['fn-estimate-ab2-20', 'fn-estimate-rk-0', 'heat-estimate-bdf2-20',
                                  'lorenz-estimate-ab2-0', 'ablation-fn-nopretrain-20'])
def test_estimation_presets_use_default_epochs(name):
    config = load_config(name)
    assert config.train.adam_epochs == 500
    assert config.train.pretrain.adam_epochs == 1000


def test_presets_all_load():
    names = list_presets()
    for expected in ('fn-discover-rk-0', 'fn-estimate-ab2-20', 'lorenz-discover-bdf2-10', 'heat-estimate-bdf2-20',
                     'ablation-fn-nopretrain-20', 'compare-lmm-fn', 'stability-all'):
        assert expected in names
    for name in names:
        load_config(name)


def test_preset_values_and_override_precedence():
    config = load_config('fn-estimate-ab2-20', overrides = ['train.adam_epochs=7', 'data.noise=0.1'], out = '/tmp/x')
    assert config.mode == 'estimate' and config.solver.scheme == 'AB2'
    assert config.train.adam_epochs == 7 and config.data.noise == 0.1
    assert config.out == '/tmp/x'

    config = load_config('fn-estimate-ab2-20', seed_override = 5)
    assert (config.seed.data, config.seed.init, config.seed.lam) == (5, 5, 5)


def test_parse_dotlist():
    text = "# header\nmode = stability   # trailing\n\nstability.schemes = [AB1, BDF2]\n"
    assert parse_dotlist(text) == ['mode=stability', 'stability.schemes=[AB1, BDF2]']
    with pytest.raises(ConfigError):
        parse_dotlist("mode stability")
    with pytest.raises(ConfigError):
        parse_dotlist(" = 3")


def test_config_file(tmp_path):
    path = tmp_path / 'run.cfg'
    path.write_text("mode = estimate\nproblem.name = heat\nsolver.dt = 0.02\nproblem.num_intervals = 10\n", encoding = 'utf-8')
    config = load_config(str(path))
    assert config.problem.name == 'heat' and config.problem.num_intervals == 10


@pytest.mark.parametrize("override", [
    'mode=train',
    'solver.scheme=RK4',
    'solver.dt=0.3',
    'data.noise=-0.1',
    'model.time_scale=fast',
    'model.time_scale=-1',
    'problem.name=duffing',
    'compare.task=stability',
    'train.num_test_points=0',
    'no.such.key=1',
    'solver.dt=abc',
    'logging.level=verbose',
    'train.adam_epochs=-1',
    'train.pretrain.lbfgs_max_iter=-5',
])
def test_invalid_values(override):
    with pytest.raises(ConfigError):
        load_config(overrides = ['problem.t1=20.0', override])


def test_stability_mode_rejects_runge_kutta():
    with pytest.raises(ConfigError):
        load_config(overrides = ['mode=stability', 'stability.schemes=[AB2, RKF45]'])


def test_unknown_source():
    with pytest.raises(ConfigError):
        load_config('no-such-preset')


def test_time_scale_value():
    assert time_scale_value(load_config()) == 'auto'
    assert time_scale_value(load_config(overrides = ['model.time_scale=2.5'])) == 2.5


def test_dotlist_round_trip(tmp_path):
    config = load_config('compare-lmm-fn', overrides = ['model.time_scale=4.0'])
    path   = tmp_path / 'config.cfg'
    path.write_text(config_to_dotlist(config), encoding = 'utf-8')
    assert config_to_dict(load_config(str(path))) == config_to_dict(config)
