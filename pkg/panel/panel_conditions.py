from panel.panel_types import CoefCondition, CoefPair


def significant_factory(threshold: float) -> CoefCondition:
    def significant(coef: CoefPair) -> bool:
        return coef[1] < threshold
    return significant


def signed_significant_factory(sign: int, threshold: float) -> CoefCondition:
    """sign = +1 / -1 requires that direction, 0 accepts either."""
    def signed_significant(coef: CoefPair) -> bool:
        value, p = coef
        if sign > 0 and not value > 0:
            return False
        if sign < 0 and not value < 0:
            return False
        return p < threshold
    return signed_significant


def below_factory(reference: float) -> CoefCondition:
    def below(coef: CoefPair) -> bool:
        return coef[0] < reference
    return below


def above_factory(reference: float) -> CoefCondition:
    def above(coef: CoefPair) -> bool:
        return coef[0] > reference
    return above


def always_true_condition() -> CoefCondition:
    def always_true(_: CoefPair) -> bool:
        return True
    return always_true
