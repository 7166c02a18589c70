import argparse

import matplotlib
matplotlib.use('Agg')
import matplotlib.pyplot as plt
import seaborn as sns

from harness.summary import runs_of
from utils.logger import read_run_log

parser = argparse.ArgumentParser(description="Plot f, theta and y traces of a RunLog")
parser.add_argument('runlog')
parser.add_argument('--out', default=None, help='image path (default <runlog>.png)')
args = parser.parse_args()

metadata, df = read_run_log(args.runlog, ['time', 'f_x', 'f_y', 'f_z', 'theta', 'y', 'p'])
sns.set_theme(style='whitegrid')
fig, axes = plt.subplots(3, 1, figsize=(9, 8), sharex=True)

for col, label in (('f_x', 'f_x (tangential)'), ('f_y', 'f_y (tangential)'), ('f_z', 'f_z (normal)')):
    sns.lineplot(x=df['time'], y=df[col], ax=axes[0], label=label)
axes[0].set_ylabel('pseudo-force in {C}')

sns.lineplot(x=df['time'], y=df['theta'], ax=axes[1], color='tab:red')
axes[1].axhline(0.05, color='gray', linestyle='--', linewidth=0.8)
axes[1].set_ylabel('theta [rad]')

axes[2].step(df['time'], df['y'], where='post', label='y')
axes[2].plot(df['time'], df['p'], alpha=0.6, label='p')
if 'gt_contact' in df.columns:
    for s, e in runs_of(df['gt_contact'].to_numpy() == 0):
        axes[2].axvspan(df['time'].iat[s], df['time'].iat[e], color='gray', alpha=0.15)
axes[2].set_ylabel('stability')
axes[2].set_xlabel('time [s]')
axes[2].legend(loc='upper right')

fig.suptitle(f"{metadata.get('scenario', '')} (seed {metadata.get('seed', '')}, mu {metadata.get('mu', '')})")
fig.tight_layout()
out = args.out or f"{args.runlog}.png"
fig.savefig(out, dpi=120)
print(f"Saved {out}")
