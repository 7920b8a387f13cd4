"""CSV output with a provenance header, written atomically."""

import csv
import io
import logging
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from spdcfocus import __version__, get_settings
from spdcfocus.runconfig import PROVENANCE_MARKER

logger = logging.getLogger(__name__)


def format_cell(value):
    """Floats with 12 significant digits; everything else via str."""
    if isinstance(value, (float, np.floating)):
        return f'{float(value):.{get_settings().CSV_SIGNIFICANT_DIGITS}g}'
    if isinstance(value, (complex, np.complexfloating)):
        raise TypeError('complex values must be split into columns before export')
    if value is None:
        return ''
    return str(value)


def render_csv(columns, rows, run_config):
    """CSV text: '#' provenance block, one header row, then the data rows."""
    output = io.StringIO()
    output.write(f'{PROVENANCE_MARKER} {__version__}\n')
    for line in run_config.to_ini().splitlines():
        output.write(f'# {line}\n' if line else '#\n')
    writer = csv.writer(output, lineterminator='\n')
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_cell(value) for value in row])
    return output.getvalue()


def write_csv(path, columns, rows, run_config):
    """Write the CSV to ``path`` (stdout when None) without leaving partial files."""
    text = render_csv(columns, rows, run_config)
    if path is None:
        sys.stdout.write(text)
        return None

    out_path = Path(path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_path = tempfile.mkstemp(prefix=out_path.name + '.', suffix='.tmp', dir=str(out_path.parent))
    try:
        with os.fdopen(fd, 'w', encoding='utf-8', newline='') as handle:
            handle.write(text)
        os.replace(tmp_path, out_path)
    except BaseException:
        try:
            os.remove(tmp_path)
        except OSError:
            pass
        raise
    logger.info('Wrote %d rows to %s', len(rows), out_path)
    return out_path
