# 测试包
