import numpy as np
import pytest

from seroclass.classification.losses import (
    diagnostic_summary,
    domain_masses,
    evaluate_on_grid,
    loss_binary,
    loss_for_labels,
    loss_ternary,
)
from seroclass.classification.rules import ClassificationRule, Weights
from seroclass.models.quadrature import build_grid
from seroclass.utils.exceptions import InvalidConfigException


class TestDomainMasses:
    def test_regions_partition_each_density(self, pos_density, neg_density, quad):
        for rule in (
            ClassificationRule.binary(pos_density, neg_density, 0.1),
            ClassificationRule.ternary(pos_density, neg_density, (0.01, 0.9)),
        ):
            masses = domain_masses(rule, quad)
            assert masses.positive_total == pytest.approx(1.0, abs=1e-10)
            assert masses.negative_total == pytest.approx(1.0, abs=1e-10)
            assert all(m >= 0.0 for m in masses.as_tuple())

    def test_binary_rule_has_no_holdout(self, pos_density, neg_density, quad):
        masses = domain_masses(ClassificationRule.binary(pos_density, neg_density, 0.1), quad)
        assert masses.P_H == 0.0 and masses.N_H == 0.0

    def test_label_override_shape(self, pos_density, neg_density, quad):
        rule = ClassificationRule.binary(pos_density, neg_density, 0.1)
        with pytest.raises(InvalidConfigException):
            evaluate_on_grid(rule, quad, np.ones((3, 3)))


class TestLossBinary:
    @pytest.mark.parametrize("p", [0.0, 0.01, 0.1, 0.5, 0.9, 1.0])
    def test_never_worse_than_a_constant_label(self, pos_density, neg_density, quad, p):
        rule = ClassificationRule.binary(pos_density, neg_density, p)
        report = loss_binary(rule, quad)
        assert 0.0 <= report.total <= min(p, 1.0 - p) + 1e-12

    def test_all_negative_labels_cost_the_prevalence(self, pos_density, neg_density, quad):
        rule = ClassificationRule.binary(pos_density, neg_density, 0.3)
        shape = build_grid(rule.domain, quad).shape
        report = loss_binary(rule, quad, labels=np.full(shape, -1))
        assert report.total == pytest.approx(0.3)
        assert report.false_pos_mass == 0.0

    def test_zero_prevalence_costs_nothing(self, pos_density, neg_density, quad):
        report = loss_binary(ClassificationRule.binary(pos_density, neg_density, 0.0), quad)
        assert report.total == 0.0

    def test_evaluated_at_another_prevalence(self, pos_density, neg_density, quad):
        rule = ClassificationRule.binary(pos_density, neg_density, 0.5)
        own = loss_binary(rule, quad)
        shifted = loss_binary(rule, quad, prevalence=0.01)
        assert shifted.total == pytest.approx(0.99 * own.false_pos_mass + 0.01 * own.false_neg_mass)
        assert shifted.total >= loss_binary(ClassificationRule.binary(pos_density, neg_density, 0.01), quad).total

    def test_weights_scale_the_error_masses(self, pos_density, neg_density, quad):
        rule = ClassificationRule.binary(pos_density, neg_density, 0.2, Weights(w_fp=2.0, w_fn=3.0))
        report = loss_binary(rule, quad)
        assert report.total == pytest.approx(2.0 * 0.8 * report.false_pos_mass + 3.0 * 0.2 * report.false_neg_mass)

    def test_ternary_rule_needs_a_prevalence(self, pos_density, neg_density, quad):
        rule = ClassificationRule.ternary(pos_density, neg_density, (0.1, 0.2))
        with pytest.raises(InvalidConfigException):
            loss_binary(rule, quad)
        assert loss_binary(rule, quad, prevalence=0.15).total >= 0.0


class TestLossTernary:
    def test_bounds(self, pos_density, neg_density, quad):
        for interval in [(0.0, 1.0), (0.01, 0.9), (0.3, 0.3)]:
            loss = loss_ternary(ClassificationRule.ternary(pos_density, neg_density, interval), quad)
            assert -1.0 <= loss <= 1.0

    @pytest.mark.parametrize("p", [0.05, 0.2, 0.6])
    def test_degenerate_interval_relates_to_binary_loss(self, pos_density, neg_density, quad, p):
        binary = loss_binary(ClassificationRule.binary(pos_density, neg_density, p), quad).total
        ternary = loss_ternary(ClassificationRule.ternary(pos_density, neg_density, (p, p)), quad)
        assert ternary == pytest.approx(2.0 * binary - 1.0, abs=1e-9)

    def test_holding_out_everything_costs_nothing(self, pos_density, neg_density, quad):
        rule = ClassificationRule.ternary(pos_density, neg_density, (0.01, 0.9))
        shape = build_grid(rule.domain, quad).shape
        assert loss_ternary(rule, quad, labels=np.zeros(shape, dtype=int)) == 0.0

    def test_optimal_labels_beat_full_holdout(self, pos_density, neg_density, quad):
        rule = ClassificationRule.ternary(pos_density, neg_density, (0.01, 0.9))
        assert loss_ternary(rule, quad) < 0.0

    def test_needs_a_ternary_rule(self, pos_density, neg_density, quad):
        with pytest.raises(InvalidConfigException):
            loss_ternary(ClassificationRule.binary(pos_density, neg_density, 0.1), quad)

    def test_loss_for_labels_dispatches_on_kind(self, pos_density, neg_density, quad):
        binary = ClassificationRule.binary(pos_density, neg_density, 0.1)
        ternary = ClassificationRule.ternary(pos_density, neg_density, (0.01, 0.9))
        labels = evaluate_on_grid(binary, quad).labels
        assert loss_for_labels(binary, labels, quad) == pytest.approx(loss_binary(binary, quad).total)
        assert loss_for_labels(ternary, labels, quad) == pytest.approx(loss_ternary(ternary, quad, labels))


class TestDiagnosticSummary:
    def test_rates(self, pos_density, neg_density, quad):
        rule = ClassificationRule.binary(pos_density, neg_density, 0.1)
        summary = diagnostic_summary(rule, quad)
        masses = domain_masses(rule, quad)
        assert summary.sensitivity == pytest.approx(masses.P_P)
        assert summary.specificity == pytest.approx(masses.N_N)
        assert 0.9 < summary.sensitivity <= 1.0 + 1e-9
        assert 0.9 < summary.specificity <= 1.0 + 1e-9
        assert 0.0 < summary.positive_predictive_value <= 1.0
        assert summary.holdout_fraction == 0.0

    def test_ternary_holdout_fraction(self, pos_density, neg_density, quad):
        rule = ClassificationRule.ternary(pos_density, neg_density, (0.01, 0.9))
        summary = diagnostic_summary(rule, quad, prevalence=0.2)
        masses = domain_masses(rule, quad)
        assert summary.holdout_fraction == pytest.approx(0.2 * masses.P_H + 0.8 * masses.N_H)
        assert summary.holdout_fraction > 0.0

    def test_predictive_value_undefined_without_positives(self, pos_density, neg_density, quad):
        summary = diagnostic_summary(ClassificationRule.binary(pos_density, neg_density, 0.0), quad)
        assert np.isnan(summary.positive_predictive_value)
