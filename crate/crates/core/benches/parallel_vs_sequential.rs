//! Parallel vs sequential throughput on the data-parallel inner loops:
//! synthetic generation, Monte Carlo oracle sampling, and batch forward
//! evaluation. Both paths run the same chunk-ordered algorithm, so the
//! numbers differ only in wall time, never in output.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use survey_transfer::exec::ExecMode;
use survey_transfer::nn::MlpModel;
use survey_transfer::synth::builtin::{anes_2020_spec, ces_2020_spec};
use survey_transfer::synth::{bayes_accuracy_mc_with_mode, generate_with_mode};
use survey_transfer::data::TaskSpec;

fn modes() -> [(&'static str, ExecMode); 2] {
    [
        ("sequential", ExecMode::Sequential),
        ("parallel", ExecMode::Parallel),
    ]
}

fn bench_generate(c: &mut Criterion) {
    let spec = ces_2020_spec();
    let mut group = c.benchmark_group("generate_100k_rows");
    group.sample_size(10);
    for (label, mode) in modes() {
        group.bench_with_input(BenchmarkId::from_parameter(label), &mode, |b, &mode| {
            b.iter(|| generate_with_mode(&spec, 100_000, mode).unwrap());
        });
    }
    group.finish();
}

fn bench_oracle(c: &mut Criterion) {
    let spec = anes_2020_spec();
    let mut group = c.benchmark_group("bayes_oracle_200k_samples");
    group.sample_size(10);
    for (label, mode) in modes() {
        group.bench_with_input(BenchmarkId::from_parameter(label), &mode, |b, &mode| {
            b.iter(|| {
                bayes_accuracy_mc_with_mode(&spec, "vote_trump", 200_000, mode).unwrap()
            });
        });
    }
    group.finish();
}

fn bench_forward(c: &mut Criterion) {
    let spec = ces_2020_spec();
    let ds = generate_with_mode(&spec, 50_000, ExecMode::Sequential).unwrap();
    let x = ds.feature_matrix().unwrap();
    let model = MlpModel::for_tasks(
        ds.schema().feature_names(),
        &[16, 8],
        &[
            TaskSpec::binary("vote_trump"),
            TaskSpec::continuous("racial_resentment"),
        ],
        7,
    )
    .unwrap();
    let mut group = c.benchmark_group("forward_50k_rows");
    group.sample_size(20);
    for (label, mode) in modes() {
        group.bench_with_input(BenchmarkId::from_parameter(label), &mode, |b, &mode| {
            b.iter(|| model.forward_batch_with_mode(&x, mode).unwrap());
        });
    }
    group.finish();
}

criterion_group!(benches, bench_generate, bench_oracle, bench_forward);
criterion_main!(benches);
