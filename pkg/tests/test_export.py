import os

import numpy as np
import pytest

from spdcfocus import __version__
from spdcfocus.export import format_cell, render_csv, write_csv
from spdcfocus.runconfig import parse_run_config

CONFIG = """\
[crystal]
length = 1 mm
pump_wavelength = 405 nm
signal_wavelength = 810 nm

[pump]
waist = 20 um

[signal]
waist = 20 um

[idler]
waist = 20 um
"""

COLUMNS = ['z_p_m', 'value']
ROWS = [(-1e-3, 0.5), (0.0, 1.0), (1e-3, 1 / 3)]


@pytest.fixture
def run_config():
    return parse_run_config(CONFIG)


def test_format_cell():
    assert format_cell(1 / 3) == '0.333333333333'
    assert format_cell(np.float64(2.5e-9)) == '2.5e-09'
    assert format_cell(3) == '3'
    assert format_cell(None) == ''
    assert format_cell('refined') == 'refined'
    with pytest.raises(TypeError):
        format_cell(1 + 2j)


def test_render_csv_layout(run_config):
    lines = render_csv(COLUMNS, ROWS, run_config).split('\n')
    assert lines[0] == f'# spdcfocus {__version__}'
    assert lines[1] == '# [crystal]'
    header = lines.index('z_p_m,value')
    assert all(line.startswith('#') for line in lines[:header])
    assert lines[header + 3] == '0.001,0.333333333333'
    assert lines[-1] == ''


def test_csv_header_is_the_configuration(run_config):
    text = render_csv(COLUMNS, ROWS, run_config)
    assert parse_run_config(text) == run_config


def test_write_csv_creates_parent_and_leaves_no_temp_files(tmp_path, run_config):
    target = tmp_path / 'results' / 'scan.csv'
    assert write_csv(str(target), COLUMNS, ROWS, run_config) == target
    assert target.read_text(encoding='utf-8') == render_csv(COLUMNS, ROWS, run_config)
    assert os.listdir(target.parent) == ['scan.csv']


def test_write_csv_to_stdout(capsys, run_config):
    assert write_csv(None, COLUMNS, ROWS, run_config) is None
    assert capsys.readouterr().out == render_csv(COLUMNS, ROWS, run_config)


def test_failed_write_keeps_previous_file(tmp_path, run_config, monkeypatch):
    target = tmp_path / 'scan.csv'
    target.write_text('previous\n', encoding='utf-8')

    def broken_replace(src, dst):
        raise OSError('disk full')

    monkeypatch.setattr(os, 'replace', broken_replace)
    with pytest.raises(OSError, match='disk full'):
        write_csv(str(target), COLUMNS, ROWS, run_config)
    assert target.read_text(encoding='utf-8') == 'previous\n'
    assert os.listdir(tmp_path) == ['scan.csv']


def test_complex_values_are_rejected_before_writing(tmp_path, run_config):
    target = tmp_path / 'scan.csv'
    with pytest.raises(TypeError):
        write_csv(str(target), COLUMNS, [(0.0, 1j)], run_config)
    assert not target.exists()
