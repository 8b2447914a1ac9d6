import numpy as np
import pytest
from numpy.testing import assert_allclose

from mocop.pipeline import (
    BankRecord,
    IngestError,
    build_censored,
    cohort_sample,
    ingest,
    pair_countries,
    read_paired_sample,
    write_paired_sample,
)

HEADER = "bank_id,country,total_assets,distress_score,failure_year,panel_start,panel_end\n"


def write_csv(path, rows):
    path.write_text(HEADER + "".join(r + "\n" for r in rows), encoding="utf-8")
    return path


def bank(bank_id, score, assets=100.0, failure_year=None, country="IT", panel=(1995, 2012)):
    return BankRecord(
        bank_id=bank_id,
        country=country,
        total_assets=assets,
        distress_score=score,
        failure_year=failure_year,
        panel_start=panel[0],
        panel_end=panel[1],
    )


# ---------------------------------------------------------------------------
# ingestion
# ---------------------------------------------------------------------------


def test_ingest_roundtrip(tmp_path):
    p = write_csv(
        tmp_path / "it.csv",
        [
            "b1,IT,120.5,0.9,2009,1995,2012",
            "b2,IT,80,0.4,,1995,2012",
            "b3,IT,33.3,0.05,1999,1995,2012",
        ],
    )
    records = ingest(p)
    assert len(records) == 3
    assert records[0] == bank("b1", 0.9, 120.5, 2009)
    assert records[1].failure_year is None
    assert records[2].failure_year == 1999


def test_ingest_header_only_gives_empty_sequence(tmp_path):
    p = write_csv(tmp_path / "empty.csv", [])
    assert ingest(p) == []


def test_ingest_rejects_bad_score_with_line_number(tmp_path):
    p = write_csv(tmp_path / "bad.csv", ["b1,IT,1,1.2,,1995,2012"])
    with pytest.raises(IngestError, match="bad.csv:2.*distress_score"):
        ingest(p)


def test_ingest_rejects_duplicates_and_missing_columns(tmp_path):
    p = write_csv(tmp_path / "dup.csv", ["b1,IT,1,0.5,,1995,2012", "b1,IT,2,0.6,,1995,2012"])
    with pytest.raises(IngestError, match="duplicate"):
        ingest(p)
    q = tmp_path / "cols.csv"
    q.write_text("bank_id,country\nb1,IT\n", encoding="utf-8")
    with pytest.raises(IngestError, match="missing required column"):
        ingest(q)


def test_ingest_rejects_failure_year_outside_panel(tmp_path):
    p = write_csv(tmp_path / "yr.csv", ["b1,IT,1,0.5,1990,1995,2012"])
    with pytest.raises(IngestError, match="outside panel"):
        ingest(p)


def test_ingest_collects_all_problems(tmp_path):
    p = write_csv(
        tmp_path / "many.csv",
        ["b1,IT,1,1.5,,1995,2012", "b2,IT,-2,0.5,,1995,2012", "b3,IT,1,0.5,,1995,2012"],
    )
    with pytest.raises(IngestError) as err:
        ingest(p)
    assert len(err.value.problems) == 2


# ---------------------------------------------------------------------------
# pairing
# ---------------------------------------------------------------------------


def test_pair_equal_sizes_aligns_by_score():
    a = [bank("a1", 0.2), bank("a2", 0.9), bank("a3", 0.5)]
    b = [bank("b1", 0.7, country="UK"), bank("b2", 0.1, country="UK"), bank("b3", 0.8, country="UK")]
    cohort = pair_countries(a, b)
    assert [(x.bank_id, y.bank_id) for x, y in cohort.pairs] == [
        ("a2", "b3"),
        ("a3", "b1"),
        ("a1", "b2"),
    ]


def test_pair_truncates_by_assets_then_resorts_by_score():
    a = [
        bank("a1", 0.9, assets=10),
        bank("a2", 0.1, assets=500),
        bank("a3", 0.8, assets=300),
        bank("a4", 0.7, assets=200),
        bank("a5", 0.6, assets=400),
    ]
    b = [bank(f"b{i}", s, country="UK") for i, s in enumerate((0.9, 0.5, 0.2))]
    cohort = pair_countries(a, b, rule="by-assets")
    # kept by assets: a2(500), a5(400), a3(300); re-sorted by score: a3, a5, a2
    assert [x.bank_id for x, _ in cohort.pairs] == ["a3", "a5", "a2"]
    assert [y.bank_id for _, y in cohort.pairs] == ["b0", "b1", "b2"]


def test_pair_truncates_by_distress_when_selected():
    a = [bank(f"a{i}", s, assets=1000 - i) for i, s in enumerate((0.1, 0.95, 0.2, 0.9))]
    b = [bank("b1", 0.5, country="UK"), bank("b2", 0.6, country="UK")]
    cohort = pair_countries(a, b, rule="by-distress")
    assert [x.bank_id for x, _ in cohort.pairs] == ["a1", "a3"]


def test_pair_never_drops_smaller_country():
    a = [bank(f"a{i}", 0.5 + i / 100) for i in range(5)]
    b = [bank(f"b{i}", 0.5 + i / 100, country="DE") for i in range(3)]
    cohort = pair_countries(a, b)
    assert sorted(y.bank_id for _, y in cohort.pairs) == ["b0", "b1", "b2"]


def test_pair_is_permutation_stable(rng):
    a = [bank(f"a{i}", float(s)) for i, s in enumerate(rng.random(8))]
    b = [bank(f"b{i}", float(s), country="DE") for i, s in enumerate(rng.random(6))]
    ref = pair_countries(a, b).pairs
    for _ in range(5):
        shuffled = pair_countries(list(rng.permutation(a)), list(rng.permutation(b))).pairs
        assert shuffled == ref


def test_pair_ties_broken_by_bank_id():
    a = [bank("a2", 0.5), bank("a1", 0.5)]
    b = [bank("b1", 0.3, country="DE"), bank("b2", 0.3, country="DE")]
    cohort = pair_countries(a, b)
    assert [x.bank_id for x, _ in cohort.pairs] == ["a1", "a2"]


def test_pair_rejects_empty_country():
    with pytest.raises(ValueError, match="at least one bank"):
        pair_countries([], [bank("b1", 0.5)])


def test_pair_rejects_unknown_rule():
    with pytest.raises(ValueError, match="rule"):
        pair_countries([bank("a", 0.5)], [bank("b", 0.5)], rule="by-luck")


# ---------------------------------------------------------------------------
# censoring construction
# ---------------------------------------------------------------------------


def test_build_censored_time_convention():
    # panel 1995-2012, failure 2009 -> 15 under the +1 convention
    a = [bank("a1", 0.9, failure_year=2009), bank("a2", 0.2)]
    b = [bank("b1", 0.8, failure_year=1996, country="UK"), bank("b2", 0.3, country="UK")]
    cohort = pair_countries(a, b)
    x_obs, y_obs, t_star = build_censored(cohort)
    assert t_star == 15.0
    assert (x_obs[0].time, x_obs[0].observed) == (15.0, True)
    assert (y_obs[0].time, y_obs[0].observed) == (2.0, True)
    assert (x_obs[1].time, x_obs[1].observed) == (15.0, False)
    assert all(o.time <= t_star for o in x_obs + y_obs)


def test_build_censored_single_failure_defines_t_star():
    a = [bank("a1", 0.9, failure_year=1997), bank("a2", 0.2)]
    b = [bank("b1", 0.8, country="UK"), bank("b2", 0.3, country="UK")]
    x_obs, y_obs, t_star = build_censored(pair_countries(a, b))
    assert t_star == 3.0
    assert [o.observed for o in x_obs] == [True, False]
    assert all((not o.observed) and o.time == 3.0 for o in y_obs)


def test_build_censored_requires_a_failure():
    a = [bank("a1", 0.9)]
    b = [bank("b1", 0.8, country="UK")]
    with pytest.raises(ValueError, match="t\\* undefined"):
        build_censored(pair_countries(a, b))


def test_cohort_sample_complete_mode_keeps_fully_failed_pairs():
    a = [bank("a1", 0.9, failure_year=2000), bank("a2", 0.5, failure_year=2001), bank("a3", 0.2)]
    b = [
        bank("b1", 0.8, failure_year=2002, country="UK"),
        bank("b2", 0.4, country="UK"),
        bank("b3", 0.1, failure_year=1999, country="UK"),
    ]
    cohort = pair_countries(a, b)
    uv, deltas, x_t, y_t, t_star = cohort_sample(cohort, censored=False)
    assert uv.shape == (1, 2)  # only the (a1, b1) pair has both failures
    assert np.all(deltas == 1)
    uv_c, deltas_c, *_ = cohort_sample(cohort, censored=True)
    assert uv_c.shape == (3, 2)
    assert deltas_c.sum() == 3


def test_all_failed_cohort_is_fully_observed():
    a = [bank(f"a{i}", 0.5 + i / 10, failure_year=2000 + i) for i in range(4)]
    b = [bank(f"b{i}", 0.5 + i / 10, failure_year=2001 + i, country="UK") for i in range(4)]
    uv, deltas, *_ = cohort_sample(pair_countries(a, b), censored=True)
    assert np.all(deltas == 1)


# ---------------------------------------------------------------------------
# paired-sample file round trip
# ---------------------------------------------------------------------------


def test_paired_sample_roundtrip(tmp_path, rng):
    uv = rng.random((20, 2)) * 0.8 + 0.1
    deltas = (rng.random((20, 2)) < 0.7).astype(int)
    x_t = rng.random(20) * 10 + 1
    y_t = rng.random(20) * 10 + 1
    path = tmp_path / "pairs.csv"
    write_paired_sample(path, uv, deltas, x_t, y_t)
    uv2, deltas2, x2, y2 = read_paired_sample(path)
    assert_allclose(uv2, uv, rtol=0, atol=0)
    assert np.array_equal(deltas2, deltas)
    assert_allclose(x2, x_t, rtol=0, atol=0)
    assert_allclose(y2, y_t, rtol=0, atol=0)


def test_read_paired_sample_rejects_bad_files(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("u,v\n0.1,0.2\n", encoding="utf-8")
    with pytest.raises(IngestError, match="missing required column"):
        read_paired_sample(p)
    q = tmp_path / "empty.csv"
    q.write_text("pair_id,u,v,delta_x,delta_y,x_time,y_time\n", encoding="utf-8")
    with pytest.raises(IngestError, match="no data rows"):
        read_paired_sample(q)
