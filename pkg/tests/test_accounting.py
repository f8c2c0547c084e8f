"""Parameter and communication counting model."""

from fedgpl.accounting import (
    METHODS,
    AccountingConfig,
    PRESETS,
    comm_accounting,
    format_table,
    param_accounting,
)


def test_reference_preset_client_params():
    report = param_accounting(PRESETS["table7"])
    assert report.row("fedgpl").client_params == 800
    assert report.row("fedavg_gpf").client_params == 81_600


def test_reference_preset_prompt_sizes():
    report = param_accounting(PRESETS["table7"])
    assert report.row("fedgpl").prompt_size == 100
    assert report.row("fedgpl_star").prompt_size == 1_100
    assert report.row("fedavg_gpf").prompt_size == 20_000
    assert report.row("fedavg_prog").prompt_size == 1_000


def test_reference_preset_graph_and_embedding_sizes():
    report = param_accounting(PRESETS["table7"])
    assert report.row("fedgpl").prompted_graph_size == 10_000
    assert report.row("fedgpl").embedding_size == 10_000
    assert report.row("fedavg_gpf").prompted_graph_size == 20_000
    assert report.row("fedavg_prog").prompted_graph_size == 21_000


def test_reference_preset_comm_units():
    report = comm_accounting(PRESETS["table7"])
    expect = {
        "fedgpl": 21_800,
        "fedgpl_star": 23_800,
        "fedavg_gpf": 81_600,
        "fedavg_prog": 45_600,
    }
    for method in METHODS:
        assert report.row(method).comm_units == expect[method]


def test_comm_decomposition_fedgpl():
    row = comm_accounting(PRESETS["table7"]).row("fedgpl")
    assert row.comm_units == 10_000 + 10_000 + 2 * 100 + 1_600


def test_accounting_is_config_pure():
    cfg = AccountingConfig(n_source=40, d0=8, d=12, n_classes=3, k_prime=2, alpha_n=0.25)
    a = param_accounting(cfg)
    b = param_accounting(cfg)
    assert a.methods == b.methods
    # and responds linearly where the model says it should
    assert a.row("fedgpl").prompt_size == 8
    assert a.row("fedgpl").prompted_graph_size == 10 * 8  # ceil(0.25*40)=10 nodes
    assert a.row("fedgpl").client_params == 8 + 12 * 3


def test_ceiling_on_prompted_nodes():
    cfg = AccountingConfig(n_source=201, alpha_n=0.5)
    report = param_accounting(cfg)
    assert report.row("fedgpl").prompted_graph_size == 101 * cfg.d0


def test_table_formatting_contains_all_rows():
    text = format_table(comm_accounting(PRESETS["table7"]))
    lines = text.splitlines()
    assert len(lines) == 5
    assert "FedGPL " in lines[1] and "21,800" in lines[1]
    assert lines[2].startswith("FedGPL*") and "23,800" in lines[2]
    assert "FedAvg+GPF" in lines[3] and "81,600" in lines[3]
    assert "FedAvg+ProG" in lines[4] and "45,600" in lines[4]
