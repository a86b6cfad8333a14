"""Data collection, imitation pretraining, PPO and MCTS refinement."""
