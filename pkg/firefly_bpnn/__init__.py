"""萤火虫算法反向传播神经网络训练工具包"""

__version__ = "0.1.0"
