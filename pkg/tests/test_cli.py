import os

from dynnet.cli import main


def test_presets_command(capsys):
    assert main(['presets']) == 0
    assert 'stability-all' in capsys.readouterr().out.split()


def test_stability_command(tmp_path):
    out  = str(tmp_path / 'stab')
    code = main(['stability', '--out', out, 'stability.schemes=[AB1]', f"logging.directory={tmp_path / 'logs'}"])
    assert code == 0
    assert os.path.exists(os.path.join(out, 'stability_AB1.csv'))


def test_config_error_exits_nonzero(tmp_path):
    assert main(['run', '--out', str(tmp_path / 'x'), 'solver.scheme=RK4']) == 1


def test_generate_and_report_commands(tmp_path, capsys):
    out  = str(tmp_path / 'run')
    args = ['--out', out, 'problem.t1=1.0', 'model.hidden_layers=1', 'model.hidden_width=4', 'train.adam_epochs=1',
            'train.lbfgs_max_iter=1', 'train.num_test_points=5', f"logging.directory={tmp_path / 'logs'}"]
    assert main(['generate'] + args) == 0
    assert os.path.exists(os.path.join(out, 'observations.csv'))

    assert main(['run', '--seed-override', '3'] + args) == 0
    capsys.readouterr()
    assert main(['report', out]) == 0
    assert 'agree' in capsys.readouterr().out
    assert main(['report', str(tmp_path / 'missing')]) == 1
