"""Numbered acceptance criteria; each test prints one PASS/FAIL line."""

import pytest

from ksbump import validation as V

pytestmark = pytest.mark.slow


def test_criterion_01_critical_values(record_criterion):
    assert record_criterion(V.criterion_1()).passed


def test_criterion_02_support_lengths(record_criterion):
    assert record_criterion(V.criterion_2()).passed


def test_criterion_03_asymmetric_window(record_criterion):
    assert record_criterion(V.criterion_3()).passed


def test_criterion_04_amplitude(record_criterion):
    assert record_criterion(V.criterion_4()).passed


def test_criterion_05_energy_hierarchy_and_limit(record_criterion):
    assert record_criterion(V.criterion_5()).passed


def test_criterion_06_closed_form_vs_quadrature(record_criterion):
    assert record_criterion(V.criterion_6()).passed


def test_criterion_07_scheme_structure(record_criterion, preset_results):
    assert record_criterion(V.criterion_7(preset_results)).passed


def test_criterion_08_global_attractor(record_criterion, preset_results):
    assert record_criterion(V.criterion_8(preset_results)).passed


def test_criterion_09_branch_selection(record_criterion, preset_results):
    assert record_criterion(V.criterion_9(preset_results)).passed


def test_criterion_10_metastability(record_criterion, preset_results):
    assert record_criterion(V.criterion_10(preset_results)).passed


def test_criterion_11_norm_asymptotics(record_criterion):
    assert record_criterion(V.criterion_11()).passed
